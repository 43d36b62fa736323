// Command-line front end: systems, minima profiles, constructions and extension checks.

#include "parageo/construct.hpp"
#include "parageo/extension.hpp"
#include "parageo/io.hpp"
#include "parageo/minima.hpp"
#include "parageo/nsystem.hpp"

#include <CLI11.hpp>
#include <toml.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

using namespace parageo;
using io::json;

namespace {

/// A failed contract: reported as a JSON violation object with exit code 2.
struct Failure {
    json report;
};

Failure failure(const std::string& object, const std::string& invariant, long location, const std::string& message) {
    return {io::violations_to_json({{invariant, location, message}}, object)};
}

struct Options {
    unsigned precision = 256;
    std::optional<double> qmax;
    std::string grid_step = "0.25";
    std::optional<double> budget_height;
    std::string budget_file;
    std::string mode = "certificate";
    std::uint64_t seed = 1;
    std::string out;
    std::string format;  // per-command default when empty

    std::string in;
    std::string field = "rational";
    std::string place = "inf";
    std::string xi;
    int grade = 1;
    bool with_star = false;
    long padic_precision = 40;

    int n = 3;
    std::string kind = "template";
    std::string cprime = "1";
    std::optional<std::string> horizon;

    std::size_t steps = 10;
    std::optional<std::string> C;
    bool heuristic = false;
    std::optional<std::string> unit;

    std::optional<std::string> omega, omega_hat, lambda, lambda_hat;
    int d = 2;
    std::vector<double> q_values{0, 2, 4};
};

void add_common(CLI::App* app, Options& o) {
    app->add_option("--precision", o.precision, "working precision in bits")->capture_default_str();
    app->add_option("--qmax", o.qmax, "largest q of the grid (default 12; construct: 0.8·q of the last step)");
    app->add_option("--grid-step", o.grid_step, "grid step (rational)")->capture_default_str();
    app->add_option("--budget-height", o.budget_height, "largest enumeration level (log height)");
    app->add_option("--budget", o.budget_file, "enumeration budget (TOML)");
    app->add_option("--mode", o.mode, "certificate | enumeration")->check(CLI::IsMember({"certificate", "enumeration"}));
    app->add_option("--seed", o.seed, "seed for generated systems")->capture_default_str();
    app->add_option("--out", o.out, "output path (stdout if omitted)");
    app->add_option("--format", o.format, "csv | json | plot")->check(CLI::IsMember({"csv", "json", "plot"}));
}

void add_target(CLI::App* app, Options& o, bool required_xi = true) {
    app->add_option("--field", o.field, "rational | D=<d>")->capture_default_str();
    app->add_option("--place", o.place, "inf | inf1 | p=<prime>[+|-]")->capture_default_str();
    auto* xi = app->add_option("--xi", o.xi, "comma-separated coordinates of ξ");
    if (required_xi) xi->required();
    app->add_option("--padic-precision", o.padic_precision, "p-adic digits for finite places")->capture_default_str();
}

void emit(const Options& o, const std::string& text) {
    if (o.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(o.out);
    if (!f) throw std::runtime_error("cannot open " + o.out);
    f << text;
}

void emit_json(const Options& o, const json& j) { emit(o, j.dump(2) + "\n"); }

json read_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw CLI::ValidationError("--in", "cannot open " + path);
    return json::parse(f);
}

Rational grid_step(const Options& o) {
    Rational s = io::parse_rational_expression(o.grid_step);
    if (s <= 0) throw CLI::ValidationError("--grid-step", "must be positive");
    return s;
}

Rational qmax_rational(const Options& o) {
    std::ostringstream os;
    os.precision(17);
    os << o.qmax.value_or(12.0);
    return parse_rational(os.str());
}

EnumerationBudget budget(const Options& o) {
    EnumerationBudget b;
    if (!o.budget_file.empty()) {
        toml::table t;
        try {
            t = toml::parse_file(o.budget_file);
        } catch (const toml::parse_error& e) {
            throw CLI::ValidationError("--budget", std::string(e.description()));
        }
        b.max_log_height = t["max_log_height"].value_or(b.max_log_height);
        b.max_candidates = static_cast<std::size_t>(t["max_candidates"].value_or(static_cast<std::int64_t>(b.max_candidates)));
        b.reduction = t["reduction"].value_or(b.reduction);
        b.level_step = t["level_step"].value_or(b.level_step);
    }
    if (o.budget_height) b.max_log_height = *o.budget_height;
    return b;
}

std::string fmt(const Real& x) { return io::decimal(x, 15); }
std::string fmt(const Rational& q) { return fmt(to_real(q)); }
std::string fmt(double x) {
    std::ostringstream os;
    os.precision(15);
    os << x;
    return os.str();
}

ApproximationTarget target_of(const Options& o) {
    auto K = io::field_from_string(o.field);
    auto w = io::place_from_string(K, o.place);
    return io::make_target(K, w, io::split_list(o.xi), o.padic_precision);
}

// ---------------------------------------------------------------------------
// system

NSystem load_system(const Options& o) { return io::system_from_json(read_json_file(o.in)); }

int system_validate(const Options& o) {
    auto sys = load_system(o);
    auto vs = validate(sys);
    if (!vs.empty()) throw Failure{io::violations_to_json(vs, "system")};
    json j = {{"status", "ok"}, {"n", sys.n()}, {"switches", sys.switches().size()}};
    if (sys.float_input()) j["float_input"] = true;
    emit_json(o, j);
    return 0;
}

void emit_evaluations(const Options& o, const NSystem& sys, const std::string& format) {
    auto grid = make_grid(qmax_rational(o), grid_step(o), sys.q0());
    const int n = sys.n();
    if (format == "json") {
        json rows = json::array();
        for (const auto& q : grid) {
            json vals = json::array();
            for (const auto& v : sys.evaluate(q)) vals.push_back(io::write_rational(v));
            rows.push_back({{"q", io::write_rational(q)}, {"values", vals}});
        }
        emit_json(o, {{"n", n}, {"rows", rows}});
        return;
    }
    std::ostringstream os;
    if (format == "csv") {
        os << "q";
        for (int j = 1; j <= n; ++j) os << ",P_" << j;
        os << "\n";
    }
    for (const auto& q : grid) {
        auto v = sys.evaluate(q);
        if (format == "csv") {
            os << q.get_str();
            for (const auto& c : v) os << "," << c.get_str();
        } else {
            os << fmt(q);
            for (const auto& c : v) os << " " << fmt(c);
        }
        os << "\n";
    }
    emit(o, os.str());
}

int system_eval(const Options& o) {
    emit_evaluations(o, load_system(o), o.format.empty() ? "csv" : o.format);
    return 0;
}

/// The dual as a system (JSON), or its evaluations with --format csv|plot.
int system_dual(const Options& o) {
    auto d = dual(load_system(o));
    if (o.format.empty() || o.format == "json")
        emit_json(o, io::system_to_json(d));
    else
        emit_evaluations(o, d, o.format);
    return 0;
}

int system_rigidify(const Options& o) {
    auto sys = load_system(o);
    Rational cp = io::parse_rational_expression(o.cprime);
    std::optional<Rational> H;
    if (o.horizon) H = io::parse_rational_expression(*o.horizon);
    auto r = rigidify(sys, cp, H);
    if (!r.violations.empty()) throw Failure{io::violations_to_json(r.violations, "rigidify")};
    json j = io::system_to_json(r.system);
    j["rigidify"] = {{"q0", io::write_rational(r.q0)},
                     {"mesh", io::write_rational(r.mesh)},
                     {"horizon", io::write_rational(r.horizon)},
                     {"sup_distance", io::write_rational(r.sup_distance)}};
    emit_json(o, j);
    return 0;
}

int system_exponents(const Options& o) {
    auto e = exponents(load_system(o));
    auto list = [](const Vector<Rational>& v) {
        json a = json::array();
        for (const auto& x : v) a.push_back(io::write_rational(x));
        return a;
    };
    json j = {{"phi_lower", list(e.phi_lower)}, {"phi_upper", list(e.phi_upper)},
              {"psi_lower", list(e.psi_lower)}, {"psi_upper", list(e.psi_upper)},
              {"omega", e.omega.str()},         {"omega_hat", e.omega_hat.str()},
              {"lambda", e.lambda.str()},       {"lambda_hat", e.lambda_hat.str()}};
    emit_json(o, j);
    return 0;
}

int system_gen(const Options& o) {
    std::mt19937_64 rng(o.seed);
    NSystem sys;
    if (o.kind == "template")
        sys = template_system(o.n, io::parse_rational_expression(o.cprime));
    else if (o.kind == "random")
        sys = random_system(o.n, rng, 3 * o.n);
    else if (o.kind == "periodic")
        sys = random_eventually_periodic(o.n, rng, false);
    else if (o.kind == "scaling")
        sys = random_eventually_periodic(o.n, rng, true);
    else
        throw CLI::ValidationError("--kind", "template | random | periodic | scaling");
    emit_json(o, io::system_to_json(sys));
    return 0;
}

// ---------------------------------------------------------------------------
// profile

int profile_compute(const Options& o) {
    const std::string format = o.format.empty() ? "csv" : o.format;
    PrecisionGuard guard(o.precision);
    auto target = target_of(o);
    auto grid = make_grid(qmax_rational(o), grid_step(o));
    auto b = budget(o);
    auto L = profile(target, o.grade, grid, b);
    std::optional<MinimaProfile> S;
    if (o.with_star) S = star_profile(target, grid, b);
    const bool exact = L.exact && (!S || S->exact);

    if (format == "json") {
        json rows = json::array();
        for (std::size_t t = 0; t < grid.size(); ++t) {
            json r = {{"q", io::write_rational(grid[t])}, {"exact", static_cast<bool>(L.row_exact[t])}};
            json v = json::array();
            for (const auto& x : L.values[t]) v.push_back(fmt(x));
            r["L"] = v;
            if (S) {
                json s = json::array();
                for (const auto& x : S->values[t]) s.push_back(fmt(x));
                r["Lstar"] = s;
                r["exact"] = L.row_exact[t] && S->row_exact[t];
            }
            rows.push_back(r);
        }
        json j = {{"target", L.target_id}, {"grade", L.grade}, {"N", L.N}, {"exact", exact},
                  {"precision_bits", o.precision}, {"rows", rows}};
        auto viol = profile_violations(L);
        if (!viol.empty()) j["violations"] = viol;
        emit_json(o, j);
    } else {
        std::ostringstream os;
        if (format == "csv") {
            os << "q";
            for (std::size_t j = 1; j <= L.N; ++j) os << ",L_" << j;
            if (S)
                for (std::size_t j = 1; j <= S->N; ++j) os << ",Lstar_" << j;
            os << ",exact\n";
        }
        const char* sep = format == "csv" ? "," : " ";
        for (std::size_t t = 0; t < grid.size(); ++t) {
            os << fmt(grid[t]);
            for (const auto& x : L.values[t]) os << sep << fmt(x);
            if (S)
                for (const auto& x : S->values[t]) os << sep << fmt(x);
            if (format == "csv") os << "," << ((L.row_exact[t] && (!S || S->row_exact[t])) ? 1 : 0);
            os << "\n";
        }
        emit(o, os.str());
    }
    if (!exact) throw failure("profile", "exact", -1, "enumeration budget exhausted before all minima were certified");
    return 0;
}

// ---------------------------------------------------------------------------
// construct

int construct_run(const Options& o) {
    using namespace parageo::construct;
    PrecisionGuard guard(o.precision);
    auto sys = load_system(o);
    const int n = sys.n();
    ConstructionConstants K = o.C ? ConstructionConstants::with_C(n, Integer(*o.C), o.heuristic)
                                  : ConstructionConstants::standard(n);
    Rational unit = o.unit ? io::parse_rational_expression(*o.unit) : sys.mesh().value_or(Rational(1));
    bool rigidified = false;
    Schedule sched;
    try {
        sched = derive_schedule(sys, unit, o.steps + 2);
    } catch (const ContractError& e) {
        if (e.invariant() != "rigid" && e.invariant() != "P1") throw;
        auto r = rigidify(sys, 2 * unit);
        if (!r.violations.empty()) throw Failure{io::violations_to_json(r.violations, "rigidify")};
        rigidified = true;
        sys = r.system;
        sched = derive_schedule(sys, unit, o.steps + 2, r.q0);
    }
    auto pt = synthesize_point(sched, K, o.steps, o.precision);
    const double qlimit = 0.8 * pt.chain.q(o.steps).convert_to<double>();
    const VerifyMode mode = o.mode == "enumeration" ? VerifyMode::enumeration : VerifyMode::certificate;
    const double qmax = std::min(o.qmax.value_or(qlimit), qlimit);
    auto rep = verify(pt, qmax, to_real(grid_step(o)).convert_to<double>(), mode, budget(o));

    const unsigned digits = bits_to_digits10(std::max(pt.chain.precision, o.precision));
    json xi = json::array(), dir = json::array();
    for (const auto& c : pt.xi) xi.push_back(io::decimal(c, static_cast<int>(digits)));
    for (const auto& c : pt.direction) dir.push_back(c.get_str());
    json records = json::array();
    for (std::size_t i = 0; i < pt.chain.records.size(); ++i) {
        const auto& r = pt.chain.records[i];
        json basis = json::array();
        for (const auto& x : r.basis) {
            json row = json::array();
            for (const auto& c : x) row.push_back(c.get_str());
            basis.push_back(row);
        }
        json alpha = json::array();
        for (const auto& a : r.alpha) alpha.push_back(a.get_str());
        records.push_back({{"index", i}, {"q", fmt(pt.chain.q(i))}, {"size", r.a}, {"k", r.k}, {"l", r.l},
                           {"epsilon", r.epsilon}, {"alpha", alpha}, {"precision_bits", r.precision},
                           {"residual_ratio", fmt(r.residual_ratio)}, {"basis", basis}});
    }
    json warnings = json::array();
    for (const auto& w : pt.chain.warnings)
        warnings.push_back({{"invariant", w.invariant}, {"location", w.location}, {"message", w.message}});
    json j = {
        {"status", rep.ok() ? "ok" : "violation"},
        {"rigorous", rep.rigorous},
        {"rigidified", rigidified},
        {"constants", {{"n", n}, {"C", K.C.get_str()}, {"minimal_C", fmt(K.minimal_C())}, {"chain_deviation", fmt(K.chain_deviation())},
                       {"deviation_bound", fmt(K.deviation_bound())}, {"mesh", fmt(K.mesh())}, {"minkowski_slack", fmt(K.minkowski_slack())}}},
        {"steps", o.steps},
        {"precision_bits", pt.chain.precision},
        {"xi", xi},
        {"xi_direction", dir},
        {"xi_decimal_radius", "1e-" + std::to_string(digits - 1)},
        {"limit_distance_bound", fmt(pt.limit_distance_bound)},
        {"verify", {{"mode", o.mode}, {"qmax", fmt(qmax)}, {"sup_deviation", fmt(rep.sup_deviation)},
                    {"sup_upper_excess", fmt(rep.sup_upper_excess)}, {"enumeration_exact", rep.enumeration_exact}}},
        {"chain", records},
        {"warnings", warnings}};
    emit_json(o, j);
    if (!rep.ok())
        throw failure("construct", "sandwich", -1, "sup deviation " + fmt(rep.sup_deviation) + " exceeds deviation_bound " + fmt(rep.deviation_bound));
    return 0;
}

// ---------------------------------------------------------------------------
// extend

int extend_verify(const Options& o) {
    using namespace parageo::extension;
    PrecisionGuard guard(o.precision);
    auto target = target_of(o);
    ScalarExtension ext(target.field(), target.place());
    auto rep = verify_bounded_differences(target, ext, make_grid(qmax_rational(o), grid_step(o)), budget(o));
    json rows = json::array();
    for (std::size_t t = 0; t < rep.q.size(); ++t)
        rows.push_back({{"q", io::write_rational(rep.q[t])}, {"diff_L", fmt(rep.diff_L[t])}, {"diff_Lstar", fmt(rep.diff_Lstar[t])}});
    json j = {{"n", rep.n},
              {"d", rep.d},
              {"sup_L", fmt(rep.sup_L)},
              {"sup_Lstar", fmt(rep.sup_Lstar)},
              {"halves", {{"L", {fmt(rep.sup_L_first), fmt(rep.sup_L_second)}},
                          {"Lstar", {fmt(rep.sup_Lstar_first), fmt(rep.sup_Lstar_second)}}}},
              {"stable", rep.stable},
              {"threshold", rep.threshold},
              {"rows", rows}};
    emit_json(o, j);
    if (!rep.stable) throw failure("extend", "stability", -1, "second-half sup exceeds first-half sup + threshold");
    return 0;
}

ExtendedRational extended(const std::optional<std::string>& s) {
    if (!s) return ExtendedRational::of(0);
    if (*s == "inf") return ExtendedRational::inf();
    return ExtendedRational::of(io::parse_rational_expression(*s));
}

int extend_transfer(const Options& o) {
    using namespace parageo::extension;
    if (o.d < 1) throw CLI::ValidationError("--d", "must be ≥ 1");
    ExponentQuadruple in{extended(o.omega ? o.omega : o.omega_hat), extended(o.omega_hat),
                         extended(o.lambda ? o.lambda : o.lambda_hat), extended(o.lambda_hat)};
    auto out = exponent_transfer(in, o.d);
    auto quad = [](const ExponentQuadruple& e) {
        return json{{"omega", e.omega.str()}, {"omega_hat", e.omega_hat.str()}, {"lambda", e.lambda.str()},
                     {"lambda_hat", e.lambda_hat.str()}};
    };
    json j = {{"d", o.d}, {"input", quad(in)}, {"extended", quad(out)},
              {"jarnik_residual_input", jarnik_extended_residual(in.omega_hat, in.lambda_hat, 1).str()},
              {"jarnik_residual_extended", jarnik_extended_residual(out.omega_hat, out.lambda_hat, o.d).str()}};
    emit_json(o, j);
    return 0;
}

// ---------------------------------------------------------------------------
// check

int check_jarnik(const Options& o) {
    auto sys = load_system(o);
    if (sys.n() != 3) throw CLI::ValidationError("--in", "the Jarník identity applies to 3-systems");
    auto e = exponents(sys);
    Rational r = jarnik_residual(e);
    emit_json(o, {{"residual", io::write_rational(r)}, {"omega_hat", e.omega_hat.str()}, {"lambda_hat", e.lambda_hat.str()}});
    if (r != 0) throw failure("system", "jarnik", -1, "nonzero residual " + r.get_str());
    return 0;
}

int check_sumrule(const Options& o) {
    PrecisionGuard guard(o.precision);
    auto target = target_of(o);
    auto grid = make_grid(qmax_rational(o), grid_step(o));
    auto b = budget(o);
    auto L = profile(target, 1, grid, b);
    auto S = star_profile(target, grid, b);
    auto viol = profile_violations(L);
    json j = {{"target", L.target_id}, {"exact", L.exact && S.exact}, {"sum_rule", fmt(sum_rule_check(L))},
              {"duality_sum", fmt(duality_sum_check(L, S))}, {"violations", viol}};
    emit_json(o, j);
    if (!viol.empty()) throw failure("profile", "structure", -1, viol.front());
    if (!(L.exact && S.exact)) throw failure("profile", "exact", -1, "enumeration budget exhausted");
    return 0;
}

int check_burger(const Options& o) {
    PrecisionGuard guard(o.precision);
    auto target = target_of(o);
    auto grid = make_grid(qmax_rational(o), grid_step(o));
    auto b = budget(o);
    json per_grade = json::array();
    auto L1 = profile(target, 1, grid, b);
    for (int k = 2; k < target.n(); ++k) {
        auto Lk = profile(target, k, grid, b);
        per_grade.push_back({{"grade", k}, {"sup", fmt(burger_comparability_check(L1, Lk))}, {"exact", Lk.exact}});
    }
    emit_json(o, {{"target", L1.target_id}, {"grades", per_grade}});
    return 0;
}

int check_thunder(const Options& o) {
    using namespace parageo::extension;
    PrecisionGuard guard(o.precision);
    auto target = target_of(o);
    ScalarExtension ext(target.field(), target.place());
    json reports = json::array();
    bool ok = true;
    for (double q : o.q_values) {
        auto r = thunder_check(target, ext, q);
        json lp = json::array(), lk = json::array(), ratios = json::array();
        for (double x : r.lambda_pullback) lp.push_back(fmt(x));
        for (double x : r.lambda_field) lk.push_back(fmt(x));
        for (double x : r.ratios) ratios.push_back(fmt(x));
        reports.push_back({{"q", fmt(q)}, {"lambda_pullback", lp}, {"lambda_field", lk}, {"ratios", ratios},
                           {"bound", fmt(r.bound)}, {"within_bounds", r.within_bounds}});
        ok = ok && r.within_bounds;
    }
    emit_json(o, {{"n", target.n()}, {"d", ext.d()}, {"reports", reports}});
    if (!ok) throw failure("thunder", "comparability", -1, "a minima ratio lies outside [1, max|α|]");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Parametric geometry of numbers over Q and quadratic fields"};
    app.require_subcommand(1);
    Options o;
    std::function<int()> action;
    auto bind = [&](CLI::App* sub, std::function<int()> f) { sub->callback([&action, f] { action = f; }); };

    auto* system = app.add_subcommand("system", "n-systems: validate, evaluate, dualize, rigidify, exponents, generate");
    system->require_subcommand(1);
    const std::map<std::string, std::string> system_help{{"validate", "check the n-system conditions"},
                                                         {"eval", "evaluate P(q) on a grid"},
                                                         {"dual", "dual system (JSON) or its evaluations"},
                                                         {"rigidify", "rigid system at bounded distance"},
                                                         {"exponents", "exact exponents from the tail"}};
    for (auto [name, fn] : std::vector<std::pair<std::string, int (*)(const Options&)>>{
             {"validate", system_validate}, {"eval", system_eval}, {"dual", system_dual},
             {"rigidify", system_rigidify}, {"exponents", system_exponents}}) {
        auto* sub = system->add_subcommand(name, system_help.at(name));
        add_common(sub, o);
        sub->add_option("--in", o.in, "system JSON")->required();
        if (name == "rigidify") {
            sub->add_option("--cprime", o.cprime, "c' (rational)")->capture_default_str();
            sub->add_option("--horizon", o.horizon, "tracking horizon for infinite tails");
        }
        bind(sub, [fn, &o] { return fn(o); });
    }
    {
        auto* sub = system->add_subcommand("gen", "generate a system");
        add_common(sub, o);
        sub->add_option("--n", o.n)->capture_default_str();
        sub->add_option("--kind", o.kind, "template | random | periodic | scaling")->capture_default_str();
        sub->add_option("--cprime", o.cprime, "template scale")->capture_default_str();
        bind(sub, [&o] { return system_gen(o); });
    }

    auto* prof = app.add_subcommand("profile", "successive minima profiles");
    prof->require_subcommand(1);
    {
        auto* sub = prof->add_subcommand("compute", "successive minima of compound grade k");
        add_common(sub, o);
        add_target(sub, o);
        sub->add_option("--grade", o.grade, "compound grade k")->capture_default_str();
        sub->add_flag("--with-star", o.with_star, "also compute the wedge-form profile");
        bind(sub, [&o] { return profile_compute(o); });
    }

    auto* cons = app.add_subcommand("construct", "points from rigid systems");
    cons->require_subcommand(1);
    {
        auto* sub = cons->add_subcommand("run", "build a point from a rigid system and verify it");
        add_common(sub, o);
        sub->add_option("--system", o.in, "system JSON")->required();
        sub->add_option("--steps", o.steps)->capture_default_str();
        sub->add_option("--C", o.C, "base C (default: smallest admissible integer)");
        sub->add_flag("--heuristic", o.heuristic, "accept C below the admissible bound (non-rigorous)");
        sub->add_option("--unit", o.unit, "mesh of the input system (default: its mesh field, else 1)");
        bind(sub, [&o] { return construct_run(o); });
    }

    auto* ext = app.add_subcommand("extend", "extension of scalars");
    ext->require_subcommand(1);
    {
        auto* sub = ext->add_subcommand("verify", "bounded differences between the K-side and extended profiles");
        add_common(sub, o);
        add_target(sub, o);
        bind(sub, [&o] { return extend_verify(o); });
        auto* tr = ext->add_subcommand("transfer", "exponents of the extended point");
        add_common(tr, o);
        tr->add_option("--omega", o.omega);
        tr->add_option("--omega-hat", o.omega_hat)->required();
        tr->add_option("--lambda", o.lambda);
        tr->add_option("--lambda-hat", o.lambda_hat)->required();
        tr->add_option("--d", o.d)->capture_default_str();
        bind(tr, [&o] { return extend_transfer(o); });
    }

    auto* check = app.add_subcommand("check", "identities and comparability checks");
    check->require_subcommand(1);
    {
        auto* j = check->add_subcommand("jarnik", "exact Jarnik residual of a 3-system");
        add_common(j, o);
        j->add_option("--in", o.in, "3-system JSON")->required();
        bind(j, [&o] { return check_jarnik(o); });
        for (auto [name, fn] : std::vector<std::pair<std::string, int (*)(const Options&)>>{
                 {"sumrule", check_sumrule}, {"burger", check_burger}, {"thunder", check_thunder}}) {
            const std::map<std::string, std::string> help{{"sumrule", "sum and duality rules of the profiles"},
                                                          {"burger", "grade-1 versus grade-k comparability"},
                                                          {"thunder", "K-side minima against pulled-back minima"}};
            auto* sub = check->add_subcommand(name, help.at(name));
            add_common(sub, o);
            add_target(sub, o);
            if (name == "thunder") sub->add_option("--q", o.q_values, "values of q (comma-separated)")->delimiter(',')->capture_default_str();
            bind(sub, [fn, &o] { return fn(o); });
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    try {
        return action();
    } catch (const Failure& f) {
        std::cout << f.report.dump(2) << "\n";
        return 2;
    } catch (const construct::ContractError& e) {
        std::cout << io::violations_to_json({{e.invariant(), e.location(), e.what()}}, "construct").dump(2) << "\n";
        return 2;
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const json::exception& e) {
        std::cerr << "error: malformed JSON: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cout << io::violations_to_json({{"runtime", -1, e.what()}}, "run").dump(2) << "\n";
        return 2;
    }
}
