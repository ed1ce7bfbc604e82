#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "delaystab/errors.hpp"
#include "delaystab/fdtd.hpp"
#include "delaystab/modal.hpp"
#include "delaystab/quasipoly.hpp"
#include "delaystab/stability.hpp"
#include "output.hpp"
#include "run_config.hpp"
#include "version.hpp"

namespace delaystab::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

constexpr const char* kParityWarning =
    "gain sign follows (-1)^(k+1): alpha > 0 when k is odd, alpha < 0 when k is even";

struct Globals {
    std::string out_dir;
    std::uint64_t seed = 0;
    bool quiet = false;
};

fs::path prepare_dir(const std::string& dir) {
    fs::path p = dir.empty() ? fs::path(".") : fs::path(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec || !fs::is_directory(p)) throw InvalidArgument("cannot create output directory " + p.string());
    return p;
}

json opt_real(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// ---------------------------------------------------------------- analyze

struct AnalyzeArgs {
    int n = 1;
    double ell = 1.0;
    double tau = 0.0;
    std::optional<double> alpha;
    std::optional<double> re_min, re_max, im_min, im_max;
    bool allow_uncertain = false;
};

int cmd_analyze(const AnalyzeArgs& a, const Globals& g, std::ostream& out) {
    const ModeSpec mode{a.n, a.ell};
    mode.validate();
    const double alpha = a.alpha.value_or(0.0);
    if (alpha != 0.0) {
        ControlParams{a.tau, alpha}.validate();
    } else if (!(a.tau >= 0.0) || !std::isfinite(a.tau)) {
        throw InvalidArgument("tau must be nonnegative");
    }
    const ModalQuasipolynomial q{beta_of_mode(mode), alpha, a.tau};
    q.validate();

    const double bound = rhp_root_bound(q);
    const Rectangle rect{a.re_min.value_or(-3.0), a.re_max.value_or(bound), a.im_min.value_or(0.0),
                         a.im_max.value_or(3.0 * bound)};
    rect.validate();

    const json inputs = {{"n", a.n},
                         {"ell", a.ell},
                         {"tau", a.tau},
                         {"alpha", alpha},
                         {"rectangle", {rect.re_min, rect.re_max, rect.im_min, rect.im_max}}};
    Manifest manifest("analyze", inputs, g.seed);
    const fs::path dir = prepare_dir(g.out_dir);

    RootSet set = locate_roots(q, rect);
    std::sort(set.roots.begin(), set.roots.end(), [](const Root& x, const Root& y) {
        if (x.value.real() != y.value.real()) return x.value.real() > y.value.real();
        return x.value.imag() < y.value.imag();
    });
    const double abscissa = spectral_abscissa(q);

    CsvWriter csv(dir / "spectrum.csv", {"re", "im", "residual"});
    for (const Root& r : set.roots) csv.row({r.value.real(), r.value.imag(), r.residual});
    csv.close();
    manifest.add_file(csv.name(), csv.rows());

    const json summary = {
        {"abscissa", abscissa},
        {"stable", abscissa < 0.0},
        {"beta", q.beta},
        {"alpha", q.alpha},
        {"tau", q.tau},
        {"n", a.n},
        {"ell", a.ell},
        {"root_count", set.roots.size()},
        {"winding_count", set.winding_count},
        {"uncertain_multiplicity", set.uncertain_multiplicity},
        {"rectangle", {set.rect.re_min, set.rect.re_max, set.rect.im_min, set.rect.im_max}},
    };
    write_json(dir / "abscissa.json", summary);
    manifest.add_file("abscissa.json", 1);

    if (!g.quiet) {
        out << "spectral abscissa " << format_real(abscissa) << " (" << (abscissa < 0.0 ? "stable" : "not stable")
            << "), " << set.roots.size() << " roots in rectangle, winding count " << set.winding_count << '\n';
    }
    if (set.uncertain_multiplicity && !a.allow_uncertain) {
        std::ostringstream os;
        os << "root certification failed after retries: winding count " << set.winding_count << ", "
           << set.roots.size() << " distinct roots refined (rerun with --allow-uncertain to accept)";
        throw NumericalError(os.str());
    }
    manifest.details() = {{"grid_density", set.grid_density}};
    manifest.write(dir);
    return kExitOk;
}

// ---------------------------------------------------------------- design

struct DesignArgs {
    int n = 1;
    double ell = 1.0;
    std::optional<double> tau;
    std::optional<double> tau_min, tau_max;
    double tau_step = 0.01;
    std::optional<double> alpha;
};

json certificate_json(const ModeSpec& mode, double tau, const std::optional<double>& alpha) {
    const auto k = k_index(mode, tau);
    const OpenInterval iv = admissible_alpha_interval(mode, tau);
    json doc = {{"n", mode.n},
                {"ell", mode.ell},
                {"tau", tau},
                {"k", k ? json(*k) : json(nullptr)},
                {"alpha_interval", iv.empty() ? json(nullptr) : json::array({iv.lo, iv.hi})},
                {"warning", kParityWarning}};
    if (alpha) {
        const StabilityCertificate cert = check_stabilizing(mode, {tau, *alpha});
        doc["alpha"] = *alpha;
        doc["satisfied"] = cert.satisfied;
    }
    return doc;
}

int cmd_design(const DesignArgs& a, const Globals& g, std::ostream& out) {
    const ModeSpec mode{a.n, a.ell};
    mode.validate();
    const bool sweep = a.tau_min || a.tau_max;
    if (sweep == a.tau.has_value()) throw InvalidArgument("give either --tau or --tau-min/--tau-max");

    std::vector<double> taus;
    if (sweep) {
        if (!a.tau_min || !a.tau_max) throw InvalidArgument("a sweep needs both --tau-min and --tau-max");
        if (!(*a.tau_min > 0.0) || !(*a.tau_max >= *a.tau_min) || !(a.tau_step > 0.0)) {
            throw InvalidArgument("sweep needs 0 < tau-min <= tau-max and tau-step > 0");
        }
        if (a.alpha) throw InvalidArgument("--alpha applies to a single --tau only");
        const auto count = static_cast<long long>(std::floor((*a.tau_max - *a.tau_min) / a.tau_step + 1e-9)) + 1;
        if (count > 10'000'000) throw InvalidArgument("sweep has too many rows");
        for (long long i = 0; i < count; ++i) taus.push_back(*a.tau_min + static_cast<double>(i) * a.tau_step);
    } else {
        if (!(*a.tau > 0.0)) throw InvalidArgument("tau must be positive");
        if (a.alpha) ControlParams{*a.tau, *a.alpha}.validate();
        taus.push_back(*a.tau);
    }

    json inputs = {{"n", a.n}, {"ell", a.ell}};
    if (sweep) {
        inputs["tau_min"] = *a.tau_min;
        inputs["tau_max"] = *a.tau_max;
        inputs["tau_step"] = a.tau_step;
    } else {
        inputs["tau"] = *a.tau;
        inputs["alpha"] = opt_real(a.alpha);
    }
    Manifest manifest("design", inputs, g.seed);
    const fs::path dir = prepare_dir(g.out_dir);

    CsvWriter csv(dir / "design.csv", {"tau", "k", "alpha_lo", "alpha_hi", "is_empty"});
    for (double tau : taus) {
        const auto k = k_index(mode, tau);
        const OpenInterval iv = admissible_alpha_interval(mode, tau);
        const Cell kc = k ? Cell(static_cast<long long>(*k)) : Cell(std::monostate{});
        if (iv.empty()) {
            csv.row({tau, kc, std::monostate{}, std::monostate{}, 1LL});
        } else {
            csv.row({tau, kc, iv.lo, iv.hi, 0LL});
        }
    }
    csv.close();
    manifest.add_file(csv.name(), csv.rows());

    if (!sweep) {
        const json cert = certificate_json(mode, *a.tau, a.alpha);
        write_json(dir / "certificate.json", cert);
        manifest.add_file("certificate.json", 1);
        if (!g.quiet) out << cert.dump(2) << '\n';
    } else if (!g.quiet) {
        out << "wrote " << csv.rows() << " rows to design.csv\n";
    }
    manifest.write(dir);
    return kExitOk;
}

// ---------------------------------------------------------------- region

struct RegionArgs {
    double beta_min = 0.0;
    double beta_max = 9.0 * kPi2;
    double alpha_min = -4.0 * kPi2;
    double alpha_max = 4.0 * kPi2;
    int resolution = 200;
    unsigned threads = 0;
};

struct Segment {
    double b0, a0, b1, a1;
};

std::optional<Segment> clip(const BoundaryLine& line, const RegionArgs& r) {
    double lo = r.beta_min, hi = r.beta_max;
    switch (line.kind) {
        case BoundaryLine::Kind::Vertical:
            if (line.offset < r.beta_min || line.offset > r.beta_max) return std::nullopt;
            return Segment{line.offset, r.alpha_min, line.offset, r.alpha_max};
        case BoundaryLine::Kind::Rising:  // alpha = beta - offset
            lo = std::max(lo, r.alpha_min + line.offset);
            hi = std::min(hi, r.alpha_max + line.offset);
            if (!(lo < hi)) return std::nullopt;
            return Segment{lo, lo - line.offset, hi, hi - line.offset};
        case BoundaryLine::Kind::Falling:  // alpha = offset - beta
            lo = std::max(lo, line.offset - r.alpha_max);
            hi = std::min(hi, line.offset - r.alpha_min);
            if (!(lo < hi)) return std::nullopt;
            return Segment{lo, line.offset - lo, hi, line.offset - hi};
    }
    return std::nullopt;
}

const char* kind_name(BoundaryLine::Kind k) {
    switch (k) {
        case BoundaryLine::Kind::Rising: return "rising";
        case BoundaryLine::Kind::Falling: return "falling";
        case BoundaryLine::Kind::Vertical: return "vertical";
    }
    return "";
}

int cmd_region(const RegionArgs& a, const Globals& g, std::ostream& out) {
    const json inputs = {{"beta_tilde", {a.beta_min, a.beta_max}},
                         {"alpha_tilde", {a.alpha_min, a.alpha_max}},
                         {"resolution", a.resolution}};
    Manifest manifest("region", inputs, g.seed);
    RegionOptions opts;
    opts.threads = a.threads;
    const RegionGrid grid = region_grid({a.beta_min, a.beta_max}, {a.alpha_min, a.alpha_max}, a.resolution, opts);
    const fs::path dir = prepare_dir(g.out_dir);

    CsvWriter csv(dir / "region.csv", {"beta_tilde", "alpha_tilde", "count", "analytic_stable"});
    std::size_t zero = 0, stable = 0;
    for (std::size_t i = 0; i < grid.beta_tilde_axis.size(); ++i) {
        for (std::size_t j = 0; j < grid.alpha_tilde_axis.size(); ++j) {
            const int c = grid.count(i, j);
            csv.row({grid.beta_tilde_axis[i], grid.alpha_tilde_axis[j], static_cast<long long>(c),
                     static_cast<long long>(grid.stable(i, j) ? 1 : 0)});
            zero += (c == 0) ? 1 : 0;
            stable += grid.stable(i, j) ? 1 : 0;
        }
    }
    csv.close();
    manifest.add_file(csv.name(), csv.rows());

    CsvWriter lines(dir / "region_boundaries.csv",
                    {"kind", "k", "offset", "beta_tilde_start", "alpha_tilde_start", "beta_tilde_end", "alpha_tilde_end"});
    for (const BoundaryLine& line : analytic_boundary_lines(a.beta_max)) {
        if (const auto s = clip(line, a)) {
            lines.row({std::string(kind_name(line.kind)), static_cast<long long>(line.k), line.offset, s->b0, s->a0,
                       s->b1, s->a1});
        }
    }
    lines.close();
    manifest.add_file(lines.name(), lines.rows());

    const std::size_t cells = grid.counts.size();
    const std::size_t invalid = grid.invalid_cells();
    if (!g.quiet) {
        out << cells << " cells: " << zero << " with no right-half-plane roots, " << stable
            << " inside the analytic lobes, " << invalid << " invalid\n";
    }
    if (100 * invalid > cells) {
        throw NumericalError("more than 1% of region cells are invalid (" + std::to_string(invalid) + " of " +
                               std::to_string(cells) + ")");
    }
    manifest.details() = {{"cells", cells}, {"invalid_cells", invalid}, {"zero_count_cells", zero},
                          {"analytic_stable_cells", stable}};
    manifest.write(dir);
    return kExitOk;
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const std::string& config_path, bool out_given, const Globals& g, std::ostream& out) {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw InvalidArgument("cannot read config file " + config_path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    const RunConfig rc = parse_run_config_text(text);
    const SimConfig cfg = rc.sim_config();

    std::string dir_name = g.out_dir;
    if (!out_given && rc.directory) dir_name = *rc.directory;

    const json inputs = {{"config", json::parse(text)}, {"config_fnv1a64", hash_hex(fnv1a64(text))}};
    Manifest manifest("simulate", inputs, g.seed);
    const fs::path dir = prepare_dir(dir_name);

    const std::vector<double> x = grid_points(cfg);
    const QuasimodeFields f = quasimode_fields({{rc.mode.n, cfg.length}, rc.zeta0, rc.zeta1}, x);
    const RunResult res = run(cfg, f.u0, f.u1, rc.snapshot_times, rc.energy_stride);

    CsvWriter energy(dir / "energy.csv", {"t", "field_energy", "weighted_energy", "t_dimensionless"});
    for (std::size_t i = 0; i < res.energy.times.size(); ++i) {
        energy.row({res.energy.times[i], res.energy.field_energy[i], res.energy.weighted_energy[i],
                    res.energy.times[i] / cfg.time_scale});
    }
    energy.close();
    manifest.add_file(energy.name(), energy.rows());

    CsvWriter snaps(dir / "snapshots.csv", {"t", "x", "u"});
    for (std::size_t s = 0; s < res.snapshots.times.size(); ++s) {
        for (std::size_t j = 0; j < x.size(); ++j) snaps.row({res.snapshots.times[s], x[j], res.snapshots.frames[s][j]});
    }
    snaps.close();
    manifest.add_file(snaps.name(), snaps.rows());

    double t_a = 2.0 * cfg.tau_eff, t_b = cfg.t_final;
    if (rc.fit_window) {
        std::tie(t_a, t_b) = *rc.fit_window;
    } else if (t_a >= t_b) {
        t_a = 0.0;
    }
    const DecayFit fit = decay_rate_fit(res.energy, t_a, t_b, EnergyKind::Field);
    const json fit_doc = {{"rate", fit.rate},
                          {"r_squared", fit.r_squared},
                          {"window_start", fit.window_start},
                          {"window_end", fit.window_end},
                          {"n_peaks", fit.n_peaks}};
    write_json(dir / "decay_fit.json", fit_doc);
    manifest.add_file("decay_fit.json", 1);

    manifest.details() = {{"time_scale", cfg.time_scale},
                          {"tau_eff", cfg.tau_eff},
                          {"alpha_eff", cfg.alpha_eff},
                          {"dt", cfg.dt},
                          {"dx", cfg.dx},
                          {"courant", cfg.courant()},
                          {"nx", cfg.nx},
                          {"steps", cfg.steps},
                          {"delay_steps", cfg.delay_steps},
                          {"delay_rounding_error", cfg.delay_rounding_error},
                          {"energy_weight", cfg.energy_weight}};
    if (!g.quiet) {
        out << cfg.steps << " steps (courant " << format_real(cfg.courant()) << ", delay " << cfg.delay_steps
            << " steps); field-energy decay rate " << format_real(fit.rate) << " over [" << format_real(t_a) << ", "
            << format_real(t_b) << "]\n";
    }
    manifest.write(dir);
    return kExitOk;
}

// ---------------------------------------------------------------- oracle

struct OracleArgs {
    int n = 1;
    double ell = 1.0;
    double tau = 0.0;
    double alpha = 0.0;
    double zeta0 = 1.0;
    double zeta1 = 0.0;
    double dt = 0.0;
    double t_final = 0.0;
};

int cmd_oracle(const OracleArgs& a, const Globals& g, std::ostream& out) {
    const ModeSpec mode{a.n, a.ell};
    const double beta = beta_of_mode(mode);
    if (!std::isfinite(a.alpha) || !std::isfinite(a.zeta0) || !std::isfinite(a.zeta1) || !std::isfinite(a.t_final)) {
        throw InvalidArgument("oracle inputs must be finite");
    }
    const json inputs = {{"n", a.n},         {"ell", a.ell},     {"tau", a.tau},
                         {"alpha", a.alpha}, {"zeta0", a.zeta0}, {"zeta1", a.zeta1},
                         {"dt", a.dt},       {"t_final", a.t_final}};
    Manifest manifest("oracle", inputs, g.seed);
    const ModalTrace tr = dde_integrate(beta, a.alpha, a.tau, a.zeta0, a.zeta1, HistoryFunction::zero(), a.dt, a.t_final);
    const fs::path dir = prepare_dir(g.out_dir);

    CsvWriter csv(dir / "modal.csv", {"t", "y", "ydot", "energy"});
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        csv.row({tr.times[i], tr.y[i], tr.ydot[i], modal_energy(tr.y[i], tr.ydot[i], beta, a.ell)});
    }
    csv.close();
    manifest.add_file(csv.name(), csv.rows());
    manifest.details() = {{"dt", tr.dt}, {"delay_steps", tr.delay_steps}, {"beta", beta}};
    if (!g.quiet) {
        out << tr.times.size() << " samples at dt " << format_real(tr.dt) << " (" << tr.delay_steps
            << " steps per delay)\n";
    }
    manifest.write(dir);
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Stabilization of a wave equation by delayed feedback: analysis and simulation", "delaystab"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    if (const char* env = std::getenv("DELAYSTAB_OUT")) g.out_dir = env;
    auto* out_opt = app.add_option("--out", g.out_dir, "Output directory (default: $DELAYSTAB_OUT or .)");
    app.add_option("--seed", g.seed, "Seed recorded in the manifest");
    app.add_flag("--quiet", g.quiet, "Suppress progress output");

    AnalyzeArgs an;
    auto* analyze = app.add_subcommand("analyze", "Roots and spectral abscissa of the modal quasipolynomial");
    analyze->add_option("--n", an.n, "Mode index")->capture_default_str();
    analyze->add_option("--ell", an.ell, "String length")->capture_default_str();
    analyze->add_option("--tau", an.tau, "Delay (0 allowed when --alpha is omitted)")->required();
    analyze->add_option("--alpha", an.alpha, "Feedback gain (omit for the undelayed string)");
    analyze->add_option("--re-min", an.re_min, "Rectangle left edge (default -3)");
    analyze->add_option("--re-max", an.re_max, "Rectangle right edge (default: right-half-plane bound)");
    analyze->add_option("--im-min", an.im_min, "Rectangle bottom edge (default 0)");
    analyze->add_option("--im-max", an.im_max, "Rectangle top edge (default: 3 x bound)");
    analyze->add_flag("--allow-uncertain", an.allow_uncertain, "Accept an uncertified (multiple-root) spectrum");

    DesignArgs de;
    auto* design = app.add_subcommand("design", "Admissible gains for a delay or a sweep of delays");
    design->add_option("--n", de.n, "Mode index")->capture_default_str();
    design->add_option("--ell", de.ell, "String length")->capture_default_str();
    design->add_option("--tau", de.tau, "Single delay");
    design->add_option("--tau-min", de.tau_min, "Sweep start");
    design->add_option("--tau-max", de.tau_max, "Sweep end (inclusive)");
    design->add_option("--tau-step", de.tau_step, "Sweep step")->capture_default_str();
    design->add_option("--alpha", de.alpha, "Gain to certify (single delay only)");

    RegionArgs re;
    auto* region = app.add_subcommand("region", "Root-count chart in the scaled (beta~, alpha~) plane");
    region->add_option("--beta-min", re.beta_min, "Lower beta~ = beta tau^2")->capture_default_str();
    region->add_option("--beta-max", re.beta_max, "Upper beta~")->capture_default_str();
    region->add_option("--alpha-min", re.alpha_min, "Lower alpha~ = alpha tau^2")->capture_default_str();
    region->add_option("--alpha-max", re.alpha_max, "Upper alpha~")->capture_default_str();
    region->add_option("--resolution", re.resolution, "Cells per axis")->capture_default_str();
    region->add_option("--threads", re.threads, "Worker threads (0 = all cores)")->capture_default_str();

    std::string config_path;
    auto* simulate = app.add_subcommand("simulate", "Finite-difference run of the delayed wave equation");
    simulate->add_option("config,--config", config_path, "Run file (JSON)")->required();

    OracleArgs orc;
    auto* oracle = app.add_subcommand("oracle", "Modal delay-equation trace");
    oracle->add_option("--n", orc.n, "Mode index")->capture_default_str();
    oracle->add_option("--ell", orc.ell, "String length")->capture_default_str();
    oracle->add_option("--tau", orc.tau, "Delay")->required();
    oracle->add_option("--alpha", orc.alpha, "Gain (0 = uncontrolled)")->capture_default_str();
    oracle->add_option("--zeta0", orc.zeta0, "Initial displacement amplitude")->capture_default_str();
    oracle->add_option("--zeta1", orc.zeta1, "Initial velocity amplitude")->capture_default_str();
    oracle->add_option("--dt", orc.dt, "Requested step (snapped so tau/dt is an integer)")->required();
    oracle->add_option("--t-final", orc.t_final, "End time")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (*analyze) return cmd_analyze(an, g, out);
        if (*design) return cmd_design(de, g, out);
        if (*region) return cmd_region(re, g, out);
        if (*simulate) return cmd_simulate(config_path, out_opt->count() > 0, g, out);
        if (*oracle) return cmd_oracle(orc, g, out);
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitInput;
}

}  // namespace delaystab::cli
