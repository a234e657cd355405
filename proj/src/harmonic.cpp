#include "nsr/harmonic.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "nsr/precond.hpp"

namespace nsr {

namespace {

void validate_model(const HarmonicModel& model, const char* who) {
    if (!(model.q0 > 0.0) || !(model.q0 < std::numbers::pi))
        throw std::invalid_argument(std::string(who) +
                                    ": fundamental must satisfy 0 < q0 < pi rad/sample");
    if (model.m < 1)
        throw std::invalid_argument(std::string(who) + ": need at least one harmonic");
}

void validate_fault(const FaultSpec& fault, std::size_t dim) {
    for (int idx : fault.zero_columns)
        if (idx < 1 || static_cast<std::size_t>(idx) > dim)
            throw std::invalid_argument("inject_fault: column index out of range");
    for (int idx : fault.zero_entries)
        if (idx < 1 || static_cast<std::size_t>(idx) > dim)
            throw std::invalid_argument("inject_fault: vector index out of range");
}

double phase_shift(int phase) {
    switch (phase) {
        case 0: return 0.0;
        case 1: return -2.0 * std::numbers::pi / 3.0;
        case 2: return 2.0 * std::numbers::pi / 3.0;
    }
    throw std::invalid_argument("phase index must be 0, 1 or 2");
}

}  // namespace

HarmonicModel HarmonicModel::from_rates(double fundamental_hz, double sample_rate_hz, int m) {
    if (!(fundamental_hz > 0.0) || !(sample_rate_hz > 0.0))
        throw std::invalid_argument("HarmonicModel: rates must be positive");
    // Compare the rates, not the rounded q0: at exactly the Nyquist rate the
    // quotient can land a few ulp below pi and slip past the q0 check.
    if (2.0 * fundamental_hz >= sample_rate_hz)
        throw std::invalid_argument("HarmonicModel: fundamental must lie below Nyquist");
    HarmonicModel model{2.0 * std::numbers::pi * fundamental_hz / sample_rate_hz, m};
    validate_model(model, "HarmonicModel");
    return model;
}

DenseVector regressor(const HarmonicModel& model, long k) {
    validate_model(model, "regressor");
    if (k < 1) throw std::invalid_argument("regressor: step index starts at 1");
    DenseVector phi(model.dim());
    const double base = model.q0 * static_cast<double>(k);
    for (int i = 1; i <= model.m; ++i) {
        phi[static_cast<std::size_t>(2 * i - 2)] = std::cos(i * base);
        phi[static_cast<std::size_t>(2 * i - 1)] = std::sin(i * base);
    }
    return phi;
}

WindowAccumulator::WindowAccumulator(HarmonicModel model, std::size_t s)
    : model_(model), s_(s), a_(model.dim()), b_(model.dim(), 0.0) {
    validate_model(model_, "WindowAccumulator");
    if (s_ < 1) throw std::invalid_argument("WindowAccumulator: window size must be >= 1");
}

void WindowAccumulator::push(double y) {
    ++k_;
    DenseVector phi = regressor(model_, k_);
    const std::size_t d = model_.dim();
    // phi[i]*phi[j] is the same product for (i,j) and (j,i), so mirroring
    // keeps the matrix bitwise symmetric through updates and downdates.
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i; j < d; ++j) {
            const double v = phi[i] * phi[j];
            a_(i, j) += v;
            if (j != i) a_(j, i) += v;
        }
        b_[i] += phi[i] * y;
    }
    buffer_.emplace_back(std::move(phi), y);
    if (buffer_.size() > s_) {
        const auto& [old_phi, old_y] = buffer_.front();
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = i; j < d; ++j) {
                const double v = old_phi[i] * old_phi[j];
                a_(i, j) -= v;
                if (j != i) a_(j, i) -= v;
            }
            b_[i] -= old_phi[i] * old_y;
        }
        buffer_.pop_front();
    }
}

std::pair<DenseMatrix, DenseVector> inject_fault(const DenseMatrix& a, const DenseVector& b,
                                                 const FaultSpec& fault) {
    if (a.dim() != b.size()) throw std::invalid_argument("inject_fault: dimension mismatch");
    validate_fault(fault, a.dim());
    DenseMatrix fa = a;
    DenseVector fb = b;
    if (fault.active) {
        const std::size_t n = a.dim();
        for (int idx : fault.zero_columns) {
            const std::size_t c = static_cast<std::size_t>(idx - 1);
            for (std::size_t i = 0; i < n; ++i) fa(i, c) = 0.0;
            if (fault.rows_too)
                for (std::size_t j = 0; j < n; ++j) fa(c, j) = 0.0;
        }
        for (int idx : fault.zero_entries) fb[static_cast<std::size_t>(idx - 1)] = 0.0;
    }
    return {std::move(fa), std::move(fb)};
}

std::vector<double> amplitudes(const DenseVector& theta, const HarmonicModel& model) {
    validate_model(model, "amplitudes");
    if (theta.size() != model.dim())
        throw std::invalid_argument("amplitudes: coefficient vector has wrong size");
    std::vector<double> out(static_cast<std::size_t>(model.m));
    for (int i = 0; i < model.m; ++i)
        out[static_cast<std::size_t>(i)] =
            std::hypot(theta[static_cast<std::size_t>(2 * i)],
                       theta[static_cast<std::size_t>(2 * i + 1)]);
    return out;
}

HarmonicModel SignalScenario::model() const {
    return HarmonicModel::from_rates(fundamental_hz, sample_rate_hz, harmonics);
}

double SignalScenario::resolved_sigma() const {
    const double sigma = noise_sigma ? *noise_sigma : 0.005 * nominal_amplitude;
    if (sigma < 0.0) throw std::invalid_argument("SignalScenario: noise sigma must be >= 0");
    return sigma;
}

std::vector<double> SignalScenario::resolved_harmonics() const {
    std::vector<double> h(static_cast<std::size_t>(harmonics), 0.0);
    h[0] = nominal_amplitude;
    if (harmonic_amplitudes.empty()) {
        for (int i = 2; i <= harmonics; ++i)
            h[static_cast<std::size_t>(i - 1)] = nominal_amplitude * 0.05 / (i - 1);
    } else {
        if (harmonic_amplitudes.size() != static_cast<std::size_t>(harmonics - 1))
            throw std::invalid_argument(
                "SignalScenario: expected one amplitude per harmonic above the fundamental");
        for (int i = 2; i <= harmonics; ++i)
            h[static_cast<std::size_t>(i - 1)] = harmonic_amplitudes[static_cast<std::size_t>(i - 2)];
    }
    return h;
}

std::size_t SignalScenario::sample_count() const {
    if (duration_s < 0.0) throw std::invalid_argument("SignalScenario: negative duration");
    return static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
}

const std::vector<double>& ThreePhaseSignal::phase(int p) const {
    switch (p) {
        case 0: return a;
        case 1: return b;
        case 2: return c;
    }
    throw std::invalid_argument("phase index must be 0, 1 or 2");
}

DenseVector true_theta(const SignalScenario& sc, int phase, double fundamental_factor) {
    const HarmonicModel model = sc.model();
    const std::vector<double> h = sc.resolved_harmonics();
    const double psi = phase_shift(phase);
    DenseVector theta(model.dim());
    for (int i = 1; i <= model.m; ++i) {
        double hi = h[static_cast<std::size_t>(i - 1)];
        if (i == 1) hi *= fundamental_factor;
        theta[static_cast<std::size_t>(2 * i - 2)] = hi * std::cos(i * psi);
        theta[static_cast<std::size_t>(2 * i - 1)] = -hi * std::sin(i * psi);
    }
    return theta;
}

bool event_applies(const PhaseEvent& ev, int phase, double t) {
    return ev.phase == phase && t >= ev.t_start && t < ev.t_end;
}

ThreePhaseSignal generate_signal(const SignalScenario& sc) {
    const HarmonicModel model = sc.model();
    for (const PhaseEvent& ev : sc.events) {
        if (ev.phase < 0 || ev.phase > 2)
            throw std::invalid_argument("generate_signal: event phase must be 0, 1 or 2");
        if (!(ev.factor > 0.0))
            throw std::invalid_argument("generate_signal: event factor must be > 0");
        if (ev.t_start < 0.0 || !(ev.t_end > ev.t_start) || ev.t_end > sc.duration_s)
            throw std::invalid_argument(
                "generate_signal: event interval must satisfy 0 <= t_start < t_end <= duration");
    }
    const std::size_t count = sc.sample_count();
    const double sigma = sc.resolved_sigma();

    ThreePhaseSignal out;
    out.a.reserve(count);
    out.b.reserve(count);
    out.c.reserve(count);

    std::mt19937_64 rng(sc.seed);
    std::normal_distribution<double> noise(0.0, sigma > 0.0 ? sigma : 1.0);

    for (std::size_t idx = 0; idx < count; ++idx) {
        const long k = static_cast<long>(idx) + 1;
        const double t = static_cast<double>(idx) / sc.sample_rate_hz;
        const DenseVector phi = regressor(model, k);
        for (int phase = 0; phase < 3; ++phase) {
            double factor = 1.0;
            for (const PhaseEvent& ev : sc.events)
                if (event_applies(ev, phase, t)) factor *= ev.factor;
            const DenseVector theta = true_theta(sc, phase, factor);
            double y = 0.0;
            for (std::size_t i = 0; i < phi.size(); ++i) y += phi[i] * theta[i];
            if (sigma > 0.0) y += noise(rng);
            (phase == 0 ? out.a : phase == 1 ? out.b : out.c).push_back(y);
        }
    }
    return out;
}

DetectionTrace detect(const std::vector<double>& stream, const HarmonicModel& model,
                      std::size_t s, const FaultSpec& fault, double beta,
                      const RichardsonConfig& cfg) {
    validate_model(model, "detect");
    if (stream.size() < s)
        throw std::invalid_argument("detect: stream shorter than the window");
    if (!(beta > 0.0)) throw std::invalid_argument("detect: beta must be > 0");

    DetectionTrace trace;
    trace.model = model;
    trace.window = s;
    trace.records.reserve(stream.size() >= s ? stream.size() - s + 1 : 0);

    WindowAccumulator acc(model, s);
    std::optional<DenseVector> warm;

    for (double y : stream) {
        acc.push(y);
        if (!acc.full()) continue;

        const auto [fa, fb] = inject_fault(acc.information(), acc.moment(), fault);
        const RegularizedSystem rs = regularize(fa, fb, beta);
        const Preconditioner pre = alpha_preconditioner(rs.a_r);

        TraceRecord rec;
        rec.k = acc.step();
        try {
            const SolveReport rep = richardson_solve(rs.a_r, rs.rhs, pre, cfg, warm);
            rec.theta = rep.theta;
            rec.residual_norm = rep.residual_norm;
            rec.converged = rep.converged;
            trace.total_mmm += rep.mmm;
            trace.total_mvm += rep.mvm;
            warm = rep.theta;
        } catch (const DivergenceError& e) {
            rec.theta = warm ? *warm : DenseVector(model.dim(), 0.0);
            rec.residual_norm = e.residual_trace.empty()
                                    ? std::numeric_limits<double>::infinity()
                                    : e.residual_trace.back();
            rec.converged = false;
            ++trace.diverged_steps;
        }
        rec.amplitudes = amplitudes(rec.theta, model);
        trace.records.push_back(std::move(rec));
    }
    return trace;
}

}  // namespace nsr
