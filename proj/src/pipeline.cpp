#include "dnsys/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "dnsys/diagonalize.hpp"
#include "dnsys/discretize.hpp"
#include "dnsys/ellipticity.hpp"
#include "dnsys/funcalc.hpp"
#include "dnsys/parametrix.hpp"
#include "dnsys/thermoplate.hpp"
#include "json.hpp"

namespace dnsys {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string timestamp() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

class Csv {
public:
    Csv(const fs::path& path, const std::string& header, bool stamp) : out_(path) {
        if (!out_) throw Error(ErrorKind::resource, "cannot open " + path.string());
        if (stamp) out_ << "# generated " << timestamp() << "\n";
        out_ << header << "\n";
    }
    void row(const std::vector<std::string>& cells) {
        for (size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << "\n";
    }

private:
    std::ofstream out_;
};

json num(double v) {
    if (std::isfinite(v)) return v;
    return std::isnan(v) ? json("nan") : json(v > 0 ? "inf" : "-inf");
}

json cjson(cplx z) { return json::array({num(z.real()), num(z.imag())}); }

json vjson(const RVec& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
    return a;
}

cplx get_complex(const json& j, const char* key, cplx dflt) {
    if (!j.contains(key)) return dflt;
    const json& v = j.at(key);
    if (v.is_number()) return v.get<double>();
    if (v.is_array() && v.size() == 2) return {v[0].get<double>(), v[1].get<double>()};
    throw Error(ErrorKind::input, std::string("field '") + key + "' must be a number or [re, im]");
}

template <class T>
T get_or(const json& j, const char* key, T dflt) {
    if (!j.is_object() || !j.contains(key)) return dflt;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw Error(ErrorKind::input, std::string("field '") + key + "' has the wrong type");
    }
}

RVec get_vec(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_array()) throw Error(ErrorKind::input, std::string("missing array '") + key + "'");
    const json& a = j.at(key);
    RVec v(a.size());
    for (size_t i = 0; i < a.size(); ++i) v[i] = a[i].get<double>();
    return v;
}

json witness_json(const std::optional<Witness>& w) {
    if (!w) return nullptr;
    return {{"x", vjson(w->x)}, {"xi", vjson(w->xi)}, {"lambda", cjson(w->lambda)}, {"kappa", w->kappa}};
}

json report_json(const EllipticityReport& r) {
    return {{"mode", mode_name(r.mode)},   {"passed", r.passed},  {"C_lower", num(r.C_lower)},
            {"R_used", num(r.R_used)},     {"samples", r.samples}, {"witness", witness_json(r.witness)}};
}

ScalarSymbol parse_scalar(const json& j, int n) {
    const std::string fam = get_or<std::string>(j, "family", "");
    if (fam == "bracket_power")
        return bracket_power_symbol(get_or(j, "mu", 2.0), get_complex(j, "coeff", 1.0), n, get_complex(j, "shift", 0.0));
    if (fam == "modulated_bracket")
        return modulated_bracket_symbol(get_or(j, "mu", 2.0), get_or(j, "a0", 2.0), get_or(j, "a1", 1.0), n);
    if (fam == "sine_modulated") return sine_modulated_symbol(get_or(j, "mu", 0.0), n);
    if (fam == "constant") return constant_symbol(get_complex(j, "value", 1.0), n, get_or(j, "order", 0.0));
    if (fam == "zero") return constant_symbol(0.0, n, get_or(j, "order", 0.0));
    throw Error(ErrorKind::input, "unknown symbol family '" + fam + "'");
}

struct ParsedSystem {
    DNSystem sys;
    std::optional<PlateSystem> plate;
};

PlateParams parse_plate(const json& j) {
    PlateParams p;
    p.eta = get_or(j, "eta", p.eta);
    p.alpha = get_or(j, "alpha", p.alpha);
    p.beta = get_or(j, "beta", p.beta);
    p.c = get_or(j, "c", p.c);
    p.excised = get_or(j, "excised", p.excised);
    return p;
}

ParsedSystem parse_system(const json& j, int n) {
    if (!j.is_object()) throw Error(ErrorKind::input, "missing 'system' object");
    const std::string fam = get_or<std::string>(j, "family", "");
    ParsedSystem out;
    if (fam == "plate") {
        out.plate = build_plate_system(parse_plate(j), n);
        out.sys = out.plate->system;
        return out;
    }
    const double delta = get_or(j, "delta", 0.0);
    if (fam == "matrix") {
        if (!j.contains("entries") || !j.at("entries").is_array()) throw Error(ErrorKind::input, "missing 'entries'");
        std::vector<ScalarSymbol> entries;
        const json& rows = j.at("entries");
        for (const auto& row : rows) {
            if (row.size() != rows.size()) throw Error(ErrorKind::input, "entries must form a square matrix");
            for (const auto& e : row) entries.push_back(parse_scalar(e, n));
        }
        out.sys = DNSystem::make(std::move(entries), get_vec(j, "l"), get_vec(j, "m"), delta);
        return out;
    }
    ScalarSymbol a = parse_scalar(j, n);
    RVec l = RVec::Zero(1), m = RVec::Constant(1, a.order);
    if (j.contains("l")) l = get_vec(j, "l");
    if (j.contains("m")) m = get_vec(j, "m");
    out.sys = DNSystem::make({a}, l, m, delta);
    return out;
}

struct Context {
    json cfg;
    json num_cfg;
    Sector sector;
    int n = 1;
    std::uint64_t seed = 0;
    fs::path out;
    bool stamp = false;
    json report;
    std::vector<std::string> files;

    fs::path file(const std::string& name) {
        files.push_back(name);
        return out / name;
    }
};

SampleGrid sample_grid(const Context& c) {
    const json s = c.cfg.value("sample", json::object());
    return dyadic_grid(c.n, get_or(s, "kmin", -2), get_or(s, "kmax", 10), get_or(s, "directions", 8),
                       get_or(s, "x_per_axis", 16));
}

TorusGrid torus(const Context& c) {
    const json g = c.cfg.value("grid", json::object());
    return TorusGrid::make(c.n, get_or(g, "N", 32), get_or(g, "L", 1.0));
}

EllipticityConfig ell_cfg(const Context& c) {
    EllipticityConfig e;
    e.threshold = get_or(c.num_cfg, "threshold", e.threshold);
    return e;
}

bool cmd_check_ellipticity(Context& c, const ParsedSystem& ps) {
    const SampleGrid grid = sample_grid(c);
    const EllipticityConfig ecfg = ell_cfg(c);
    const std::string which = get_or<std::string>(c.num_cfg, "mode", "both");
    if (which != "both" && which != "determinant" && which != "minors")
        throw Error(ErrorKind::input, "mode must be determinant, minors or both");
    std::vector<EllipticityMode> modes;
    if (which != "minors") modes.push_back(EllipticityMode::determinant);
    if (which != "determinant") modes.push_back(EllipticityMode::minors);
    const bool fixed_R = c.num_cfg.contains("R");
    const double R_max = get_or(c.num_cfg, "R_max", 16.0);
    Csv csv(c.file("ellipticity.csv"), "mode,passed,C_lower,R_used,samples", c.stamp);
    std::vector<EllipticityReport> reps;
    bool ok = true;
    for (auto mode : modes) {
        EllipticityReport r;
        if (fixed_R) {
            const double R = c.num_cfg.at("R").get<double>();
            r = mode == EllipticityMode::determinant ? check_det_ellipticity(ps.sys, c.sector, grid, R, ecfg)
                                                     : check_minor_ellipticity(ps.sys, c.sector, grid, R, ecfg);
        } else {
            r = search_R(ps.sys, c.sector, grid, mode, R_max, ecfg);
        }
        ok = ok && r.passed;
        csv.row({mode_name(mode), r.passed ? "1" : "0", fmt(r.C_lower), fmt(r.R_used), std::to_string(r.samples)});
        c.report["checks"].push_back(report_json(r));
        reps.push_back(r);
    }
    if (reps.size() == 2) c.report["checkers_agree"] = checkers_agree(reps[0], reps[1], ecfg.threshold, 10.0);
    c.report["grid"] = grid.descriptor;
    return ok;
}

bool cmd_find_shift(Context& c, const ParsedSystem& ps) {
    const SampleGrid grid = sample_grid(c);
    ShiftResult s = find_shift(ps.sys, c.sector, grid, ell_cfg(c), get_or(c.num_cfg, "alpha_max", 1e6));
    c.report["alpha0"] = num(s.alpha0);
    c.report["check_at_alpha0"] = report_json(s.report_at_alpha0);
    Csv csv(c.file("shift.csv"), "alpha0,passed,C_lower", c.stamp);
    csv.row({fmt(s.alpha0), s.report_at_alpha0.passed ? "1" : "0", fmt(s.report_at_alpha0.C_lower)});
    return s.report_at_alpha0.passed;
}

std::vector<int> orders_list(const Context& c, std::vector<int> dflt) {
    if (!c.num_cfg.contains("N")) return dflt;
    const json& v = c.num_cfg.at("N");
    if (v.is_number_integer()) return {v.get<int>()};
    return v.get<std::vector<int>>();
}

bool cmd_parametrix_probe(Context& c, const ParsedSystem& ps) {
    ProbeConfig pc;
    pc.kmin = get_or(c.num_cfg, "kmin", pc.kmin);
    pc.kmax = get_or(c.num_cfg, "kmax", pc.kmax);
    pc.x_points = get_or(c.num_cfg, "x_points", pc.x_points);
    const double tol = get_or(c.num_cfg, "slope_tol", 0.3);
    Csv csv(c.file("probe.csv"), "N,xi_norm,lambda_abs,i,j,value", c.stamp);
    bool ok = true;
    for (int N : orders_list(c, {1, 2})) {
        DecayProbe p = decay_probe(ps.sys, ProbeQuantity::J_minus_1, N, c.sector, pc);
        const double expected = -(1.0 - ps.sys.delta) * N;
        const bool pass = std::isinf(p.fitted_slope) ? p.fitted_slope < 0 : std::abs(p.fitted_slope - expected) <= tol;
        ok = ok && pass;
        for (const auto& s : p.samples)
            csv.row({std::to_string(N), fmt(s.xi_norm), fmt(s.lambda_abs), std::to_string(s.i), std::to_string(s.j),
                     fmt(s.value)});
        c.report["probes"].push_back({{"N", N},
                                      {"quantity", quantity_name(p.quantity)},
                                      {"fitted_slope", num(p.fitted_slope)},
                                      {"expected_slope", expected},
                                      {"sup", num(p.sup)},
                                      {"passed", pass}});
    }
    return ok;
}

bool cmd_diagonalize(Context& c, const ParsedSystem& ps) {
    ReducedSystem red = reduce_orders(ps.sys);
    DiagProbeConfig dc;
    dc.kmin = get_or(c.num_cfg, "kmin", dc.kmin);
    dc.kmax = get_or(c.num_cfg, "kmax", dc.kmax);
    dc.closure = get_or(c.num_cfg, "closure", dc.closure);
    const double tol = get_or(c.num_cfg, "slope_tol", 0.3);
    Csv csv(c.file("diagonalize.csv"), "N,xi_norm,j,d_abs,offdiag_residual", c.stamp);
    bool ok = true;
    for (int N : orders_list(c, {1})) {
        DiagProbe p = offdiag_decay_probe(red, N, dc);
        const bool pass = std::isinf(p.fitted_slope) ? p.fitted_slope < 0 : p.fitted_slope <= -N + tol;
        ok = ok && pass;
        for (const auto& s : p.samples)
            csv.row({std::to_string(N), fmt(s.xi_norm), std::to_string(s.j), fmt(s.d_abs), fmt(s.offdiag_residual)});
        c.report["probes"].push_back({{"N", N},
                                      {"fitted_slope", num(p.fitted_slope)},
                                      {"max_residual", num(p.max_residual)},
                                      {"passed", pass}});
    }
    c.report["reduced_orders"] = vjson(red.sys.r());
    return ok;
}

void write_sweep(const fs::path& path, const SweepResult& r, bool stamp) {
    Csv csv(path, "lambda_re,lambda_im,norm,norm_times_bracket,singular", stamp);
    for (const auto& row : r.rows)
        csv.row({fmt(row.lambda.real()), fmt(row.lambda.imag()), fmt(row.norm), fmt(row.norm_times_bracket),
                 row.singular ? "1" : "0"});
}

// slope over the rows on the negative real ray at |lambda| >= 2^k_tail
double tail_slope(const SweepResult& r, double min_abs) {
    SweepResult tail;
    for (const auto& row : r.rows)
        if (std::abs(row.lambda) >= min_abs && !row.singular && row.lambda.imag() >= 0.0) tail.rows.push_back(row);
    return tail.rows.size() >= 2 ? sweep_slope(tail) : std::numeric_limits<double>::quiet_NaN();
}

bool cmd_resolvent_sweep(Context& c, const ParsedSystem& ps) {
    const TorusGrid g = torus(c);
    const cplx alpha = get_complex(c.num_cfg, "shift", 0.0);
    std::optional<Perturbation> K;
    if (c.num_cfg.contains("perturbation")) {
        const json& pj = c.num_cfg.at("perturbation");
        K = make_perturbation(ps.sys, g, get_or(pj, "epsilon", 1.0), get_or(pj, "amplitude", 0.1), c.seed);
        c.report["perturbation"] = {{"epsilon", K->epsilon}, {"amplitude", K->amplitude}, {"seed", c.seed}};
    }
    DiscreteOperator op = assemble_dense(ps.sys, g, alpha, K ? &*K : nullptr);
    const int kmin = get_or(c.num_cfg, "kmin", 0), kmax = get_or(c.num_cfg, "kmax", 19);
    SweepResult r = resolvent_sweep(op, c.sector, sweep_lambdas(c.sector, kmin, kmax));
    write_sweep(c.file("sweep.csv"), r, c.stamp);
    const double slope = tail_slope(r, std::ldexp(1.0, kmax - 3));
    c.report["max_weighted"] = num(r.max_weighted);
    c.report["singular_count"] = r.singular_count;
    c.report["tail_slope"] = num(slope);
    return r.singular_count == 0 && std::isfinite(r.max_weighted);
}

CalculusResult run_hinfty(Context& c, const DNSystem& sys, const TorusGrid& g, cplx alpha) {
    DiscreteOperator op = assemble_dense(sys, g, alpha);
    auto fam = default_family(c.sector, get_or(c.num_cfg, "family_kmax", 8), get_or(c.num_cfg, "rotated", false));
    SectorContour contour = make_sector_contour(c.sector, get_or(c.num_cfg, "nodes_per_panel", 16));
    return hinfty_bound_probe(op, fam, c.sector, contour);
}

bool hinfty_report(Context& c, const CalculusResult& r, const std::string& csv_name) {
    Csv csv(c.file(csv_name), "function,sup_norm,op_norm,ratio", c.stamp);
    for (const auto& e : r.entries) csv.row({e.label, fmt(e.sup_norm), fmt(e.op_norm), fmt(e.ratio)});
    const double drift = std::abs(r.M_refined - r.M_estimate) / r.M_estimate;
    c.report["hinfty"] = {{"M_estimate", num(r.M_estimate)},
                          {"M_refined", num(r.M_refined)},
                          {"relative_drift", num(drift)},
                          {"refinement_change", num(r.refinement_change)},
                          {"nodes", r.nodes}};
    return std::isfinite(r.M_estimate) && drift <= 0.05;
}

bool cmd_hinfty(Context& c, const ParsedSystem& ps) {
    const TorusGrid g = torus(c);
    CalculusResult r = run_hinfty(c, ps.sys, g, get_complex(c.num_cfg, "shift", 0.0));
    return hinfty_report(c, r, "hinfty.csv");
}

bool cmd_plate_demo(Context& c, const ParsedSystem& parsed) {
    if (!parsed.plate) throw Error(ErrorKind::input, "plate-demo needs system.family = plate");
    const PlateSystem& ps = *parsed.plate;
    const PlateParams& p = ps.params;
    c.report["plate"] = {{"eta", p.eta},
                         {"alpha", p.alpha},
                         {"beta", p.beta},
                         {"excised", p.excised},
                         {"parabolic", ps.parabolic},
                         {"state", ps.state},
                         {"l", vjson(ps.orders.l)},
                         {"m", vjson(ps.orders.m)},
                         {"r", vjson(ps.orders.r)}};
    if (!ps.parabolic) c.report["warnings"].push_back("parameters outside the parabolic region");

    double minor_err = 0.0;
    {
        Csv csv(c.file("minors.csv"), "s,lambda_re,lambda_im,kappa,closed_form,generic,relative_error", c.stamp);
        for (int k = -2; k <= 6; ++k) {
            const double s = std::ldexp(1.0, k);
            RVec xi = RVec::Zero(c.n);
            xi[0] = s;
            CMat At = plate_matrix(p, xi, false);
            for (cplx lam : {cplx(0.0), c.sector.boundary(0, s), c.sector.boundary(1, 4.0 * s), cplx(-s * s)})
                for (int kappa = 1; kappa <= 3; ++kappa) {
                    cplx cf = plate_minor_det(p, s, lam, kappa), gen = minor_det(At, lam, kappa);
                    double e = std::abs(cf - gen) / std::abs(cf);
                    minor_err = std::max(minor_err, e);
                    csv.row({fmt(s), fmt(lam.real()), fmt(lam.imag()), std::to_string(kappa), fmt(std::abs(cf)),
                             fmt(std::abs(gen)), fmt(e)});
                }
        }
    }
    c.report["minor_max_relative_error"] = num(minor_err);

    const TorusGrid g = torus(c);
    const double shift = get_or(c.num_cfg, "shift", 1.0);
    c.report["shift"] = shift;
    DiscreteOperator op = assemble_dense(ps.system, g, shift);
    const int kmin = get_or(c.num_cfg, "kmin", 0), kmax = get_or(c.num_cfg, "kmax", 19);
    SweepResult sw = resolvent_sweep(op, c.sector, sweep_lambdas(c.sector, kmin, kmax));
    write_sweep(c.file("sweep.csv"), sw, c.stamp);
    const double slope = tail_slope(sw, std::ldexp(1.0, kmax - 3));
    c.report["sweep"] = {{"points", sw.rows.size()},
                         {"max_weighted", num(sw.max_weighted)},
                         {"singular_count", sw.singular_count},
                         {"tail_slope", num(slope)}};

    // smooth random initial field, no forcing
    CounterRng rng(c.seed, 1);
    const int M = g.size();
    CVec u0 = CVec::Zero(3 * M);
    for (int i = 0; i < 3; ++i)
        for (int a = 0; a < M; ++a) {
            const double x = g.points[a][0];
            u0[i * M + a] = rng.uniform(-1, 1) * std::cos(x) + rng.uniform(-1, 1) * std::sin(2 * x) + rng.uniform(-1, 1);
        }
    EvolveConfig ec;
    ec.T = get_or(c.num_cfg, "T", 0.1);
    ec.steps = get_or(c.num_cfg, "steps", 100);
    ec.samples = get_or(c.num_cfg, "samples", 10);
    PlateTrajectory tr = evolve_plate(p, g, u0, nullptr, ec);
    bool monotone = true;
    for (size_t i = 1; i < tr.energy.size(); ++i) monotone = monotone && tr.energy[i] <= tr.energy[i - 1] + 1e-10;
    {
        Csv csv(c.file("trajectory.csv"), "t,mode,abs_u1,abs_u2,abs_u3", c.stamp);
        for (const auto& r : tr.rows)
            csv.row({fmt(r.t), std::to_string(r.mode), fmt(r.abs_u[0]), fmt(r.abs_u[1]), fmt(r.abs_u[2])});
    }
    c.report["evolution"] = {{"T", ec.T},
                             {"steps", ec.steps},
                             {"energy_initial", num(tr.energy.front())},
                             {"energy_final", num(tr.energy.back())},
                             {"energy_monotone", monotone},
                             {"seed", c.seed}};

    bool hok = true;
    if (get_or(c.num_cfg, "hinfty", true)) hok = hinfty_report(c, run_hinfty(c, ps.system, g, shift), "hinfty.csv");

    return minor_err <= 1e-12 && sw.singular_count == 0 && std::isfinite(sw.max_weighted) && monotone && hok;
}

json base_config(const std::string& command) {
    json j = {{"schema", kConfigSchema}, {"command", command}, {"seed", 0}, {"sector", {{"theta", kPi / 2}}}};
    if (command == "plate-demo" || command == "hinfty" || command == "resolvent-sweep") {
        j["system"] = {{"family", "plate"}, {"eta", 2.0}, {"alpha", 0.9}, {"beta", 0.75}};
        j["grid"] = {{"n", 1}, {"N", 32}, {"L", 1.0}};
        j["numeric"] = {{"shift", 1.0}};
    } else if (command == "parametrix-probe") {
        j["system"] = {{"family", "modulated_bracket"}, {"mu", 2.0}, {"a0", 2.0}, {"a1", 1.0}};
        j["sector"]["theta"] = 3 * kPi / 4;
        j["numeric"] = {{"N", {1, 2}}};
    } else {
        j["system"] = {{"family", "bracket_power"}, {"mu", 2.0}};
        j["numeric"] = json::object();
    }
    return j;
}

}  // namespace

const std::vector<std::string>& pipeline_commands() {
    static const std::vector<std::string> cmds = {"check-ellipticity", "find-shift", "parametrix-probe", "diagonalize",
                                                  "resolvent-sweep",   "hinfty",     "plate-demo"};
    return cmds;
}

std::string default_config(const std::string& command) {
    bool known = false;
    for (const auto& c : pipeline_commands()) known = known || c == command;
    if (!known) throw Error(ErrorKind::input, "unknown command '" + command + "'");
    return base_config(command).dump(2);
}

RunOutcome run_config_text(const std::string& json_text, const RunOptions& opts) {
    RunOutcome outcome;
    Context c;
    c.out = opts.out_dir;
    c.stamp = opts.stamp;
    c.report = json::object();
    auto started = std::chrono::steady_clock::now();
    try {
        fs::create_directories(c.out);
    } catch (const fs::filesystem_error& e) {
        outcome.exit_code = 2;
        outcome.status = "error";
        outcome.message = e.what();
        return outcome;
    }
    try {
        try {
            c.cfg = json::parse(json_text);
        } catch (const json::parse_error& e) {
            throw Error(ErrorKind::input, std::string("config does not parse: ") + e.what());
        }
        if (!c.cfg.is_object()) throw Error(ErrorKind::input, "config must be a JSON object");
        if (get_or<std::string>(c.cfg, "schema", "") != kConfigSchema)
            throw Error(ErrorKind::input, std::string("schema must be ") + kConfigSchema);
        const std::string command = get_or<std::string>(c.cfg, "command", "");
        c.report["schema"] = kConfigSchema;
        c.report["command"] = command;
        if (opts.stamp) c.report["generated"] = timestamp();
        c.num_cfg = c.cfg.value("numeric", json::object());
        c.seed = opts.seed ? *opts.seed : get_or<std::uint64_t>(c.cfg, "seed", 0);
        const json grid = c.cfg.value("grid", json::object());
        c.n = get_or(grid, "n", 1);
        if (c.n != 1 && c.n != 2) throw Error(ErrorKind::input, "grid.n must be 1 or 2");
        const double theta = get_or(c.cfg.value("sector", json::object()), "theta", kPi / 2);
        if (!(theta > 0.0 && theta < kPi)) throw Error(ErrorKind::input, "theta must lie in (0, pi)");
        c.sector = Sector::make(theta);
        c.report["theta"] = theta;
        if (!c.cfg.contains("system")) throw Error(ErrorKind::input, "missing 'system'");
        ParsedSystem ps = parse_system(c.cfg.at("system"), c.n);
        c.report["orders"] = {{"l", vjson(ps.sys.l)}, {"m", vjson(ps.sys.m)}, {"r", vjson(ps.sys.r())}};

        bool ok;
        if (command == "check-ellipticity") ok = cmd_check_ellipticity(c, ps);
        else if (command == "find-shift") ok = cmd_find_shift(c, ps);
        else if (command == "parametrix-probe") ok = cmd_parametrix_probe(c, ps);
        else if (command == "diagonalize") ok = cmd_diagonalize(c, ps);
        else if (command == "resolvent-sweep") ok = cmd_resolvent_sweep(c, ps);
        else if (command == "hinfty") ok = cmd_hinfty(c, ps);
        else if (command == "plate-demo") ok = cmd_plate_demo(c, ps);
        else throw Error(ErrorKind::input, "unknown command '" + command + "'");
        outcome.exit_code = ok ? 0 : 1;
        outcome.status = ok ? "pass" : "check_failed";
    } catch (const Error& e) {
        outcome.exit_code = exit_code_for(e.kind());
        outcome.status = "error";
        outcome.message = e.what();
        c.report["error"] = {{"kind", e.kind_name()}, {"message", e.what()}};
    } catch (const json::exception& e) {
        outcome.exit_code = 2;
        outcome.status = "error";
        outcome.message = e.what();
        c.report["error"] = {{"kind", "input"}, {"message", e.what()}};
    } catch (const std::bad_alloc&) {
        outcome.exit_code = 2;
        outcome.status = "error";
        outcome.message = "out of memory";
        c.report["error"] = {{"kind", "resource"}, {"message", outcome.message}};
    } catch (const std::exception& e) {
        outcome.exit_code = 3;
        outcome.status = "error";
        outcome.message = e.what();
        c.report["error"] = {{"kind", "numerical"}, {"message", e.what()}};
    }
    c.report["status"] = outcome.status;
    c.report["exit_code"] = outcome.exit_code;
    if (opts.stamp)
        c.report["elapsed_s"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    c.report["files"] = c.files;
    std::ofstream(c.out / "report.json") << c.report.dump(2) << "\n";
    outcome.files = c.files;
    outcome.files.push_back("report.json");
    return outcome;
}

RunOutcome run_config_file(const std::string& path, const RunOptions& opts) {
    std::ifstream in(path);
    if (!in) {
        RunOutcome o;
        o.exit_code = 2;
        o.status = "error";
        o.message = "cannot read config " + path;
        return o;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return run_config_text(ss.str(), opts);
}

}  // namespace dnsys
