#include "delaystab/fdtd.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "delaystab/errors.hpp"

namespace delaystab {

namespace {

constexpr double kBlowUp = 1e6;

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw InvalidArgument(std::string(name) + " must be positive and finite");
    }
}

SimConfig finish_config(SimConfig cfg, const Discretization& disc) {
    require_positive(disc.dx, "dx");
    require_positive(disc.dt, "dt");
    require_positive(disc.t_final, "t_final");
    require_positive(cfg.tau_eff, "tau");
    if (!std::isfinite(cfg.alpha_eff)) throw InvalidArgument("alpha must be finite");

    cfg.dx = disc.dx;
    cfg.dt = disc.dt;
    cfg.t_final = disc.t_final;

    const double cells = cfg.length / cfg.dx;
    cfg.nx = static_cast<int>(std::lround(cells));
    if (cfg.nx < 2 || std::abs(cells - cfg.nx) > 1e-9 * cells) {
        throw InvalidArgument("dx must divide the string length into at least two cells");
    }

    if (cfg.tau_eff < cfg.dt) {
        std::ostringstream os;
        os << "effective delay " << cfg.tau_eff << " is shorter than dt " << cfg.dt;
        throw DelayTooSmall(os.str());
    }
    if (disc.snap_dt) {
        const double ratio = cfg.tau_eff / cfg.dt;
        const double nearest = std::round(ratio);
        const double m = (std::abs(ratio - nearest) <= 1e-9 * ratio) ? nearest : std::ceil(ratio);
        cfg.dt = cfg.tau_eff / m;
    }
    if (cfg.courant() > 1.0) {
        std::ostringstream os;
        os << "CFL violation: c*dt/dx = " << cfg.courant() << " > 1";
        throw CflViolation(os.str());
    }

    cfg.delay_steps = static_cast<int>(std::lround(cfg.tau_eff / cfg.dt));
    cfg.delay_rounding_error = std::abs(cfg.tau_eff - cfg.delay_steps * cfg.dt);
    cfg.steps = static_cast<long>(std::ceil(cfg.t_final / cfg.dt - 1e-9));
    cfg.energy_weight = disc.energy_weight.value_or(2.0 * std::abs(cfg.alpha_eff) * cfg.tau_eff);
    if (cfg.energy_weight < 0.0) throw InvalidArgument("energy weight must be nonnegative");
    return cfg;
}

double trapezoid_squared(std::span<const double> u, double dx) {
    double s = 0.0;
    for (std::size_t j = 1; j + 1 < u.size(); ++j) s += u[j] * u[j];
    s += 0.5 * (u.front() * u.front() + u.back() * u.back());
    return s * dx;
}

// int (xi/2) int u(t - tau rho)^2 drho dx at `level`, trapezoid over the M+1 frames.
double history_term(const DelayedWaveState& state, const SimConfig& cfg, long level) {
    const long m = cfg.delay_steps;
    double s = 0.5 * (state.history.squared_norm(level - m) + state.history.squared_norm(level));
    for (long k = level - m + 1; k < level; ++k) s += state.history.squared_norm(k);
    return 0.5 * cfg.energy_weight * s / static_cast<double>(m);
}

}  // namespace

SimConfig make_config(const PhysicalSetup& physical, const Discretization& disc) {
    require_positive(physical.l, "l");
    require_positive(physical.c, "c");
    require_positive(physical.ell, "ell");
    SimConfig cfg;
    cfg.length = physical.l;
    cfg.wave_speed = physical.c;
    cfg.ell = physical.ell;
    cfg.time_scale = physical.l / (physical.c * physical.ell);
    cfg.tau_eff = cfg.time_scale * physical.tau;
    cfg.alpha_eff = physical.alpha / (cfg.time_scale * cfg.time_scale);
    return finish_config(cfg, disc);
}

SimConfig make_config(const DimensionlessSetup& setup, const Discretization& disc) {
    require_positive(setup.ell, "ell");
    SimConfig cfg;
    cfg.length = setup.ell;
    cfg.wave_speed = 1.0;
    cfg.ell = setup.ell;
    cfg.time_scale = 1.0;
    cfg.tau_eff = setup.tau;
    cfg.alpha_eff = setup.alpha;
    return finish_config(cfg, disc);
}

std::vector<double> grid_points(const SimConfig& config) {
    std::vector<double> x(static_cast<std::size_t>(config.nx) + 1);
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = static_cast<double>(j) * config.dx;
    x.back() = config.length;
    return x;
}

DelayHistory::DelayHistory(std::size_t width, std::size_t capacity)
    : width_(width), capacity_(capacity), data_(width * capacity, 0.0), norms_(capacity, 0.0) {}

std::size_t DelayHistory::slot(long level) const {
    const auto cap = static_cast<long>(capacity_);
    return static_cast<std::size_t>(((level % cap) + cap) % cap);
}

std::span<const double> DelayHistory::frame(long level) const {
    return {data_.data() + slot(level) * width_, width_};
}

void DelayHistory::store(long level, std::span<const double> values, double dx) {
    const std::size_t s = slot(level);
    std::copy(values.begin(), values.end(), data_.begin() + static_cast<long>(s * width_));
    norms_[s] = trapezoid_squared(values, dx);
}

DelayedWaveState init_state(const SimConfig& config, std::span<const double> u0,
                            std::span<const double> u1) {
    const auto width = static_cast<std::size_t>(config.nx) + 1;
    if (u0.size() != width || u1.size() != width) {
        throw ShapeMismatch("initial fields must have nx + 1 samples");
    }
    auto max_abs = [](std::span<const double> u) {
        double m = 0.0;
        for (double v : u) m = std::max(m, std::abs(v));
        return m;
    };
    const double tol = 1e-12 * std::max({1.0, max_abs(u0), max_abs(u1)});
    if (std::abs(u0.front()) > tol || std::abs(u0.back()) > tol || std::abs(u1.front()) > tol ||
        std::abs(u1.back()) > tol) {
        throw ShapeMismatch("initial fields must vanish at both ends");
    }

    DelayedWaveState st;
    // M + 2 frames: the energy at level step - 1 reaches back to level step - 1 - M.
    st.history = DelayHistory(width, static_cast<std::size_t>(config.delay_steps) + 2);
    st.u_prev.assign(u0.begin(), u0.end());
    st.u_prev.front() = st.u_prev.back() = 0.0;

    const double dt = config.dt;
    const double r2 = (config.wave_speed / config.dx) * (config.wave_speed / config.dx);
    const auto delayed = st.history.frame(-static_cast<long>(config.delay_steps));
    st.u_curr.assign(width, 0.0);
    for (std::size_t j = 1; j + 1 < width; ++j) {
        const double lap = r2 * (u0[j + 1] - 2.0 * u0[j] + u0[j - 1]);
        st.u_curr[j] = u0[j] + dt * u1[j] + 0.5 * dt * dt * (lap - config.alpha_eff * delayed[j]);
    }
    st.history.store(0, st.u_prev, config.dx);
    st.history.store(1, st.u_curr, config.dx);
    st.step = 1;
    return st;
}

void step(DelayedWaveState& state, const SimConfig& config) {
    const std::size_t width = state.u_curr.size();
    const double c2 = config.courant() * config.courant();
    const double gain = config.dt * config.dt * config.alpha_eff;
    const auto delayed = state.history.frame(state.step - config.delay_steps);
    const std::vector<double>& u = state.u_curr;
    const std::vector<double>& up = state.u_prev;

    std::vector<double> next(width, 0.0);
    for (std::size_t j = 1; j + 1 < width; ++j) {
        next[j] = 2.0 * u[j] - up[j] + c2 * (u[j + 1] - 2.0 * u[j] + u[j - 1]) - gain * delayed[j];
    }
    state.history.store(state.step + 1, next, config.dx);
    state.u_prev = std::move(state.u_curr);
    state.u_curr = std::move(next);
    ++state.step;
}

double field_energy(const DelayedWaveState& state, const SimConfig& config) {
    if (state.step < 1) throw HistoryIncomplete("field energy needs two time levels");
    const std::size_t width = state.u_curr.size();
    const std::vector<double>& mid = state.u_prev;
    const bool centred = state.step >= 2;
    const auto older = centred ? state.history.frame(state.step - 2) : std::span<const double>(mid);
    const double inv = centred ? 1.0 / (2.0 * config.dt) : 1.0 / config.dt;

    std::vector<double> ut(width);
    for (std::size_t j = 0; j < width; ++j) ut[j] = (state.u_curr[j] - older[j]) * inv;
    const double kinetic = trapezoid_squared(ut, config.dx);

    double strain = 0.0;
    for (std::size_t j = 0; j + 1 < width; ++j) {
        const double ux = (mid[j + 1] - mid[j]) / config.dx;
        strain += ux * ux;
    }
    strain *= config.dx;
    return 0.5 * (kinetic + config.wave_speed * config.wave_speed * strain);
}

double weighted_energy(const DelayedWaveState& state, const SimConfig& config) {
    if (state.step < config.delay_steps) {
        throw HistoryIncomplete("delay history is not yet full");
    }
    return field_energy(state, config) + history_term(state, config, state.step - 1);
}

RunResult run(const SimConfig& config, std::span<const double> u0, std::span<const double> u1,
              std::span<const double> snapshot_times, int energy_stride) {
    if (energy_stride < 1) throw InvalidArgument("energy_stride must be >= 1");

    std::multimap<long, double> wanted;  // level -> snapped time
    for (double t : snapshot_times) {
        if (!std::isfinite(t)) throw InvalidArgument("snapshot time must be finite");
        const long level = std::clamp(std::lround(t / config.dt), 0L, config.steps);
        wanted.emplace(level, static_cast<double>(level) * config.dt);
    }

    RunResult out;
    out.energy.sample_stride = energy_stride;
    DelayedWaveState st = init_state(config, u0, u1);

    auto capture = [&](long level, const std::vector<double>& frame) {
        auto [lo, hi] = wanted.equal_range(level);
        for (auto it = lo; it != hi; ++it) {
            out.snapshots.times.push_back(it->second);
            out.snapshots.frames.push_back(frame);
        }
    };
    // Pre-history is identically zero, so the history integral is defined from t = 0.
    auto record_energy = [&] {
        const long level = st.step - 1;
        if (level % energy_stride != 0) return;
        const double e = field_energy(st, config);
        out.energy.times.push_back(static_cast<double>(level) * config.dt);
        out.energy.field_energy.push_back(e);
        out.energy.weighted_energy.push_back(e + history_term(st, config, level));
    };

    capture(0, st.u_prev);
    if (config.steps >= 1) capture(1, st.u_curr);
    record_energy();
    while (st.step < config.steps) {
        step(st, config);
        double peak = 0.0;
        for (double v : st.u_curr) peak = std::max(peak, std::abs(v));
        if (!(peak <= kBlowUp)) {
            std::ostringstream os;
            os << "displacement exceeded " << kBlowUp << " at t = " << st.step * config.dt;
            throw NumericalBlowUp(os.str());
        }
        capture(st.step, st.u_curr);
        record_energy();
    }
    out.final_state = std::move(st);
    return out;
}

}  // namespace delaystab
