#include "hp43/variational.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include "hp43/energy.hpp"
#include "hp43/errors.hpp"
#include "hp43/parallel.hpp"
#include "hp43/spectral.hpp"

namespace hp43 {

namespace {

FourierField inverse_bracket(const FourierField& u)
{
    return u.apply_multiplier([](FrequencyIndex n) { return 1.0 / n.bracket(); });
}

FourierField fit(const FourierField& u, int N) { return u.cutoff() == N ? u : u.with_cutoff(N); }

BoundEstimate bound_from(const std::vector<double>& xs)
{
    const Estimate e = mean_se(xs);
    return {e.value, e.se, e.se > 0.1 * std::abs(e.value)};
}

}  // namespace

double DriftPath::cost() const
{
    double c = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) c += 0.5 * values[k].norm2() * (times[k + 1] - times[k]);
    return c;
}

FourierField I_theta(const DriftPath& drift)
{
    int N = 0;
    for (const auto& v : drift.values) N = std::max(N, v.cutoff());
    FourierField out(N);
    for (std::size_t k = 0; k < drift.values.size(); ++k)
        out += (drift.times[k + 1] - drift.times[k]) * inverse_bracket(fit(drift.values[k], N));
    return out;
}

const FourierField& AdaptedHistory::increment(std::size_t j) const
{
    if (j >= k_)
        throw AdaptednessError("drift on interval " + std::to_string(k_) + " read the increment on interval " +
                               std::to_string(j));
    return path_.increment(j);
}

FourierField AdaptedHistory::Y(std::size_t j) const
{
    if (j > k_) throw AdaptednessError("drift on interval " + std::to_string(k_) + " read Y at grid point " + std::to_string(j));
    return j == k_ ? Y_k_ : path_.Y(j);
}

DriftPath build_drift(const WienerPath& path, const DriftPolicy& policy)
{
    const int N = path.cutoff();
    DriftPath drift;
    drift.times = path.times();
    drift.values.reserve(path.intervals());
    FourierField Y(N), X(N);
    for (std::size_t k = 0; k < path.intervals(); ++k) {
        const AdaptedHistory history(path, k, Y, X);
        FourierField theta = policy(history);
        const double dt = drift.times[k + 1] - drift.times[k];
        const FourierField dY = inverse_bracket(path.increment(k));
        X += dt * inverse_bracket(fit(theta, N)) + dY;
        Y += dY;
        drift.values.push_back(std::move(theta));
    }
    return drift;
}

TerminalCost renormalized_terminal(const PotentialParams& params, const RenormTable& table)
{
    TerminalCost t;
    t.value = [params, &table](const FourierField& u) { return -script_r_N(u, params, table); };
    t.value_and_gradient = [params, &table](const FourierField& u) {
        ForceEnergy fe = hartree_force_energy(u, params, table);
        return std::pair{-fe.script_R_N, -1.0 * fe.force};
    };
    t.hessian = [params, &table](const FourierField& u, const FourierField& v) {
        return -1.0 * hartree_force_derivative(u, v, params, table);
    };
    return t;
}

TerminalCost quadratic_terminal(const std::function<double(FrequencyIndex)>& a)
{
    TerminalCost t;
    t.value = [a](const FourierField& u) {
        double s = 0.0;
        const auto& lat = u.lattice();
        const auto c = u.coeffs();
        for (std::size_t i = 0; i < lat.size(); ++i) s += a(lat[i]) * std::norm(c[i]);
        return 0.5 * s;
    };
    t.value_and_gradient = [value = t.value, a](const FourierField& u) {
        return std::pair{value(u), u.apply_multiplier(a)};
    };
    t.hessian = [a](const FourierField&, const FourierField& v) { return v.apply_multiplier(a); };
    return t;
}

BoundEstimate bd_objective(const DriftPolicy& policy, const TerminalCost& terminal, int N, int paths, int intervals,
                           std::uint64_t seed)
{
    if (paths < 2) throw ConfigError("bd_objective needs at least 2 paths");
    std::vector<double> xs(static_cast<std::size_t>(paths));
    parallel_for(xs.size(), [&](std::size_t p) {
        const WienerPath path = sample_Y_path(N, intervals, seed, p);
        const DriftPath drift = build_drift(path, policy);
        xs[p] = terminal.value(path.Y(path.intervals()) + I_theta(drift).with_cutoff(N)) + drift.cost();
    });
    return bound_from(xs);
}

BoundEstimate bd_objective(const DriftPolicy& policy, const PotentialParams& params, const RenormTable& table,
                           int paths, int intervals, std::uint64_t seed)
{
    return bd_objective(policy, renormalized_terminal(params, table), table.N, paths, intervals, seed);
}

DriftPolicy FeedbackDrift::policy(const TerminalCost& terminal) const
{
    return [self = *this, terminal](const AdaptedHistory& h) {
        const int k = int(h.interval());
        const FourierField& X = h.state();
        FourierField theta = X.apply_multiplier([&](FrequencyIndex n) { return self.linear[self.index(k, n.norm2())] * n.bracket(); });
        bool any = false;
        for (long s = 0; s <= long(self.N) * self.N; ++s) any = any || self.force[self.index(k, s)] != 0.0;
        if (any) {
            const FourierField grad = terminal.value_and_gradient(X).second;
            theta -= grad.apply_multiplier([&](FrequencyIndex n) { return self.force[self.index(k, n.norm2())] / n.bracket(); });
        }
        return theta;
    };
}

namespace {

// The control problem on a fixed Wiener ensemble, in raw coefficient form. With
//   θ_k = ⟨∇⟩C_kX_k − ⟨∇⟩^{−1}E_k∇G(X_k),  X_{k+1} = X_k + Δt⟨∇⟩^{−1}θ_k + ΔY_k,
// the adjoint of L = G(X_K) + ½ΣΔt‖θ_k‖² runs backwards with μ_k = Δt(⟨∇⟩^{−1}λ_{k+1} + θ_k),
//   λ_k = λ_{k+1} + ⟨∇⟩C_kμ_k − D²G(X_k)[⟨∇⟩^{−1}E_kμ_k].
class FeedbackProblem {
public:
    FeedbackProblem(const TerminalCost& terminal, int N, int intervals, int paths, std::uint64_t seed,
                    std::uint64_t first_replica)
        : terminal_(terminal), N_(N), K_(intervals), S_(std::size_t(N * N + 1)), dt_(1.0 / intervals),
          lattice_(Lattice::get(N))
    {
        const std::size_t L = lattice_->size();
        shell_.resize(L);
        bracket_.resize(L);
        for (std::size_t i = 0; i < L; ++i) {
            shell_[i] = std::size_t((*lattice_)[i].norm2());
            bracket_[i] = (*lattice_)[i].bracket();
        }
        dY_.resize(std::size_t(paths));
        parallel_for(dY_.size(), [&](std::size_t p) {
            const WienerPath path = sample_Y_path(N, intervals, seed, first_replica + p);
            auto& d = dY_[p];
            d.resize(std::size_t(K_) * L);
            for (int k = 0; k < K_; ++k) {
                const FourierField inc = inverse_bracket(path.increment(std::size_t(k)));
                std::copy(inc.coeffs().begin(), inc.coeffs().end(), d.begin() + std::ptrdiff_t(std::size_t(k) * L));
            }
        });
    }

    std::size_t gains() const { return std::size_t(K_) * S_; }

    struct Result {
        std::vector<double> per_path;
        std::vector<double> grad;       // [c gains, e gains]
        std::vector<double> curvature;  // diagonal of the drift-cost Hessian, same layout
        double mean = 0.0;
    };

    // x = [c, e]
    Result evaluate(const std::vector<double>& x, bool with_gradient) const
    {
        const std::size_t P = dY_.size();
        Result r;
        r.per_path.assign(P, 0.0);
        std::vector<std::vector<double>> g(with_gradient ? P : 0), h(with_gradient ? P : 0);
        parallel_for(P, [&](std::size_t p) {
            if (with_gradient) {
                g[p].assign(2 * gains(), 0.0);
                h[p].assign(2 * gains(), 0.0);
            }
            r.per_path[p] = path_objective(x, p, with_gradient ? &g[p] : nullptr, with_gradient ? &h[p] : nullptr);
        });
        r.mean = mean_se(r.per_path).value;
        if (with_gradient) {
            r.grad.assign(2 * gains(), 0.0);
            r.curvature.assign(2 * gains(), 0.0);
            for (std::size_t p = 0; p < P; ++p)
                for (std::size_t j = 0; j < r.grad.size(); ++j) {
                    r.grad[j] += g[p][j] / double(P);
                    r.curvature[j] += h[p][j] / double(P);
                }
        }
        return r;
    }

private:
    FourierField field(const Complex* c) const
    {
        FourierField u(N_);
        std::copy(c, c + lattice_->size(), u.coeffs().begin());
        return u;
    }

    bool uses_force(const double* e) const
    {
        for (std::size_t s = 0; s < S_; ++s)
            if (e[s] != 0.0) return true;
        return false;
    }

    double path_objective(const std::vector<double>& x, std::size_t p, std::vector<double>* grad,
                          std::vector<double>* curv) const
    {
        const std::size_t L = lattice_->size();
        const double* c = x.data();
        const double* e = x.data() + gains();
        std::vector<Complex> X(std::size_t(K_ + 1) * L, Complex{});
        std::vector<Complex> F(std::size_t(K_) * L, Complex{});  // ∇G(X_k)
        std::vector<char> has_F(std::size_t(K_), 0);
        double cost = 0.0;
        for (int k = 0; k < K_; ++k) {
            const Complex* xk = &X[std::size_t(k) * L];
            Complex* next = &X[std::size_t(k + 1) * L];
            Complex* fk = &F[std::size_t(k) * L];
            const Complex* d = &dY_[p][std::size_t(k) * L];
            const double* ck = c + std::size_t(k) * S_;
            const double* ek = e + std::size_t(k) * S_;
            if (grad || uses_force(ek)) {
                const FourierField gk = terminal_.value_and_gradient(field(xk)).second;
                std::copy(gk.coeffs().begin(), gk.coeffs().end(), fk);
                has_F[std::size_t(k)] = 1;
            }
            for (std::size_t i = 0; i < L; ++i) {
                const std::size_t s = shell_[i];
                const Complex theta = ck[s] * bracket_[i] * xk[i] - (has_F[std::size_t(k)] ? ek[s] / bracket_[i] * fk[i] : Complex{});
                next[i] = xk[i] + dt_ * theta / bracket_[i] + d[i];
                cost += 0.5 * dt_ * std::norm(theta);
            }
        }
        if (!grad) return terminal_.value(field(&X[std::size_t(K_) * L])) + cost;

        auto [value, gradient] = terminal_.value_and_gradient(field(&X[std::size_t(K_) * L]));
        std::vector<Complex> lambda(gradient.coeffs().begin(), gradient.coeffs().end());
        std::vector<Complex> mu(L), pushed(L);
        for (int k = K_ - 1; k >= 0; --k) {
            const Complex* xk = &X[std::size_t(k) * L];
            const Complex* fk = &F[std::size_t(k) * L];
            const double* ck = c + std::size_t(k) * S_;
            const double* ek = e + std::size_t(k) * S_;
            double* gc = grad->data() + std::size_t(k) * S_;
            double* ge = grad->data() + gains() + std::size_t(k) * S_;
            double* hc = curv->data() + std::size_t(k) * S_;
            double* he = curv->data() + gains() + std::size_t(k) * S_;
            bool force_on = false;
            for (std::size_t i = 0; i < L; ++i) {
                const std::size_t s = shell_[i];
                const double b = bracket_[i];
                const Complex theta = ck[s] * b * xk[i] - ek[s] / b * fk[i];
                mu[i] = dt_ * (lambda[i] / b + theta);
                gc[s] += (std::conj(mu[i]) * (b * xk[i])).real();
                ge[s] -= (std::conj(mu[i]) * (fk[i] / b)).real();
                hc[s] += dt_ * b * b * std::norm(xk[i]);
                he[s] += dt_ * std::norm(fk[i]) / (b * b);
                pushed[i] = ek[s] / b * mu[i];
                force_on = force_on || ek[s] != 0.0;
            }
            if (force_on) {
                const FourierField hv = terminal_.hessian(field(xk), field(pushed.data()));
                const auto hc2 = hv.coeffs();
                for (std::size_t i = 0; i < L; ++i) lambda[i] -= hc2[i];
            }
            for (std::size_t i = 0; i < L; ++i) lambda[i] += ck[shell_[i]] * bracket_[i] * mu[i];
        }
        return value + cost;
    }

    const TerminalCost& terminal_;
    int N_;
    int K_;
    std::size_t S_;
    double dt_;
    std::shared_ptr<const Lattice> lattice_;
    std::vector<std::size_t> shell_;
    std::vector<double> bracket_;
    std::vector<std::vector<Complex>> dY_;
};

double dot(const std::vector<double>& a, const std::vector<double>& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

DriftOptimum optimize_drift(const TerminalCost& terminal, int N, const DriftOptConfig& cfg)
{
    if (cfg.intervals < 4) throw ConfigError("drift optimization needs at least 4 time intervals");
    if (cfg.paths < 2) throw ConfigError("drift optimization needs at least 2 paths");
    const FeedbackProblem train(terminal, N, cfg.intervals, cfg.paths, cfg.seed, 0);
    const std::size_t G = train.gains();

    DriftOptimum out;
    out.drift = FeedbackDrift(N, cfg.intervals);
    std::vector<double> x(2 * G, 0.0);
    auto cur = train.evaluate(x, true);
    out.baseline = bound_from(cur.per_path);

    // Fixed diagonal scaling from the starting point. Gains with zero curvature never affect the
    // drift (X_0 = 0), and e stays frozen when force feedback is off.
    std::vector<double> scale(x.size(), 0.0);
    for (std::size_t j = 0; j < x.size(); ++j)
        if ((cfg.force_feedback || j < G) && cur.curvature[j] > 0.0) scale[j] = 1.0 / cur.curvature[j];

    std::vector<std::vector<double>> S, Y;
    std::vector<double> velocity(x.size(), 0.0), dir(x.size()), trial(x.size());
    auto scaled_gradient = [&] {
        for (std::size_t j = 0; j < x.size(); ++j) dir[j] = -scale[j] * cur.grad[j];
    };
    int flat = 0;
    for (out.iterations = 0; out.iterations < cfg.max_iter; ++out.iterations) {
        if (cfg.method == DriftOptimizer::lbfgs) {
            // Two-loop recursion with H₀ = γ·diag(scale).
            std::vector<double> q(x.size());
            for (std::size_t j = 0; j < x.size(); ++j) q[j] = scale[j] > 0.0 ? cur.grad[j] : 0.0;
            std::vector<double> alpha(S.size());
            for (std::size_t m = S.size(); m-- > 0;) {
                alpha[m] = dot(S[m], q) / dot(S[m], Y[m]);
                for (std::size_t j = 0; j < x.size(); ++j) q[j] -= alpha[m] * Y[m][j];
            }
            double gamma = 1.0;
            if (!S.empty()) {
                double yhy = 0.0;
                for (std::size_t j = 0; j < x.size(); ++j) yhy += Y.back()[j] * scale[j] * Y.back()[j];
                if (yhy > 0.0) gamma = dot(S.back(), Y.back()) / yhy;
            }
            for (std::size_t j = 0; j < x.size(); ++j) q[j] *= gamma * scale[j];
            for (std::size_t m = 0; m < S.size(); ++m) {
                const double beta = dot(Y[m], q) / dot(S[m], Y[m]);
                for (std::size_t j = 0; j < x.size(); ++j) q[j] += (alpha[m] - beta) * S[m][j];
            }
            for (std::size_t j = 0; j < x.size(); ++j) dir[j] = scale[j] > 0.0 ? -q[j] : 0.0;
        } else {
            scaled_gradient();
            for (std::size_t j = 0; j < x.size(); ++j) dir[j] += cfg.momentum * velocity[j];
        }
        double slope = dot(cur.grad, dir);
        if (!(slope < 0.0)) {
            S.clear();
            Y.clear();
            scaled_gradient();
            slope = dot(cur.grad, dir);
        }
        if (!(slope < 0.0)) break;

        bool accepted = false;
        double t = 1.0;
        FeedbackProblem::Result next;
        for (int tries = 0; tries < 40; ++tries, t *= 0.5) {
            for (std::size_t j = 0; j < x.size(); ++j) trial[j] = x[j] + t * dir[j];
            next = train.evaluate(trial, true);
            if (next.mean <= cur.mean + 1e-4 * t * slope) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            out.stalled = true;
            out.message = "line search stalled at iteration " + std::to_string(out.iterations);
            break;
        }
        std::vector<double> s(x.size()), y(x.size());
        for (std::size_t j = 0; j < x.size(); ++j) {
            s[j] = trial[j] - x[j];
            y[j] = next.grad[j] - cur.grad[j];
        }
        if (dot(s, y) > 1e-12 * std::sqrt(dot(s, s) * dot(y, y))) {
            S.push_back(std::move(s));
            Y.push_back(std::move(y));
            if (int(S.size()) > cfg.memory) {
                S.erase(S.begin());
                Y.erase(Y.begin());
            }
        }
        for (std::size_t j = 0; j < x.size(); ++j) velocity[j] = t * dir[j];
        const double gain = cur.mean - next.mean;
        x = trial;
        cur = std::move(next);
        flat = gain < cfg.rel_tol * std::abs(cur.mean) ? flat + 1 : 0;
        if (flat >= 3) break;
    }
    std::copy(x.begin(), x.begin() + std::ptrdiff_t(G), out.drift.linear.begin());
    std::copy(x.begin() + std::ptrdiff_t(G), x.end(), out.drift.force.begin());
    out.bound = bound_from(cur.per_path);
    const FeedbackProblem check(terminal, N, cfg.intervals, cfg.paths, cfg.seed, std::uint64_t(cfg.paths));
    out.validation = bound_from(check.evaluate(x, false).per_path);
    return out;
}

DriftOptimum optimize_drift(const PotentialParams& params, const RenormTable& table, const DriftOptConfig& cfg)
{
    return optimize_drift(renormalized_terminal(params, table), table.N, cfg);
}

std::pair<double, std::vector<double>> feedback_objective(const TerminalCost& terminal, const FeedbackDrift& drift,
                                                          const DriftOptConfig& cfg)
{
    if (drift.intervals != cfg.intervals) throw ConfigError("drift and config disagree on the time grid");
    const FeedbackProblem problem(terminal, drift.N, cfg.intervals, cfg.paths, cfg.seed, 0);
    std::vector<double> x = drift.linear;
    x.insert(x.end(), drift.force.begin(), drift.force.end());
    auto r = problem.evaluate(x, true);
    return {r.mean, std::move(r.grad)};
}

DirectLogZ direct_neg_log_Z(const PotentialParams& params, const RenormTable& table, int samples, std::uint64_t seed)
{
    if (samples < 2) throw ConfigError("need at least 2 samples");
    std::vector<double> logw(static_cast<std::size_t>(samples));
    parallel_for(logw.size(), [&](std::size_t i) {
        logw[i] = script_r_N(sample_mu({table.N, 1.0, seed, i}), params, table);
    });
    const double top = *std::max_element(logw.begin(), logw.end());
    double s = 0.0, s2 = 0.0;
    for (double l : logw) {
        const double w = std::exp(l - top);
        s += w;
        s2 += w * w;
    }
    const double n = double(samples);
    const double mean = s / n;
    const double var = std::max(s2 / n - mean * mean, 0.0) * n / (n - 1.0);
    return {-(top + std::log(mean)), std::sqrt(var / n) / mean, s * s / s2};
}

double witness_profile(double r)
{
    static const double scale = [] {
        // Trapezoid rule; the integrand is flat to all orders at both ends, so it converges geometrically.
        constexpr int n = 4096;
        double acc = 0.0;
        for (int i = 1; i < n; ++i) {
            const double x = 0.5 + 0.5 * double(i) / n;
            const double b = std::exp(-1.0 / ((x - 0.5) * (1.0 - x)));
            acc += x * x * b * b;
        }
        acc *= 0.5 / n;
        return 1.0 / std::sqrt(4.0 * std::numbers::pi * acc);
    }();
    if (!(r > 0.5 && r < 1.0)) return 0.0;
    return scale * std::exp(-1.0 / ((r - 0.5) * (1.0 - r)));
}

FourierField build_fM(int M)
{
    if (M < 4) throw ConfigError("f_M needs M >= 4");
    const double amp = std::pow(double(M), -1.5);
    return FourierField::from_function(M, [&](FrequencyIndex n) {
        return Complex(4 * n.norm2() > long(M) * M ? amp * witness_profile(n.norm() / M) : 0.0);
    });
}

double quartic_Q(const FourierField& u, double beta)
{
    const FourierField w = multiply(u, u);
    const double zero = std::norm(w(FrequencyIndex{0, 0, 0}));
    return 0.25 * (hartree_form(w, beta) - zero);
}

WitnessDrift witness_drift(const WienerPath& path, int M)
{
    if (M < 4) throw ConfigError("witness needs M >= 4");
    if (M > path.cutoff()) throw ConfigError("M exceeds the path cutoff");
    const int N = path.cutoff();
    const std::size_t half = path.index_of(0.5);
    const double sqrt_st = std::sqrt(0.5 * sigma_N(M));
    const FourierField fM = build_fM(M);
    auto theta_of = [&](const FourierField& Y_half) {
        return (sqrt_st * fM - project(Y_half, M).with_cutoff(M)).with_cutoff(N);
    };

    WitnessDrift out;
    out.theta0 = build_drift(path, [&](const AdaptedHistory& h) {
        if (h.interval() < half) return FourierField(N);
        return theta_of(h.Y(half)).apply_multiplier([](FrequencyIndex n) { return 2.0 * n.bracket(); });
    });
    out.Theta0 = theta_of(path.Y(half));
    return out;
}

namespace {

double cutoff_value(const WienerPath& path, const FourierField& Theta0, double sigma_big_N)
{
    const FourierField YN = path.Y(path.intervals());
    return (YN.norm2() - sigma_big_N) + 2.0 * YN.inner(Theta0).real() + Theta0.norm2();
}

void check_witness_sizes(int M, int N, int paths)
{
    if (M < 4) throw ConfigError("witness needs M >= 4");
    if (N < M) throw ConfigError("witness needs N >= M");
    if (paths < 2) throw ConfigError("witness needs at least 2 paths");
}

}  // namespace

std::vector<double> cutoff_statistic(int M, int N, int paths, std::uint64_t seed)
{
    check_witness_sizes(M, N, paths);
    const double sN = sigma_N(N);
    std::vector<double> S(static_cast<std::size_t>(paths));
    parallel_for(S.size(), [&](std::size_t p) {
        const WienerPath path(N, {0.0, 0.5, 1.0}, seed, p);
        S[p] = cutoff_value(path, witness_drift(path, M).Theta0, sN);
    });
    return S;
}

namespace {

// Per-path pieces of the witness bound that do not depend on σ.
struct WitnessSamples {
    int M = 0;
    int N = 0;
    double Q_fM = 0.0;  // σ̃_M²Q(f_M)
    std::vector<double> Q, cost, S;
};

WitnessSamples witness_samples(double beta, int M, const WitnessConfig& cfg)
{
    WitnessSamples ws;
    ws.M = M;
    ws.N = cfg.N < 0 ? 2 * M : cfg.N;
    check_witness_sizes(M, ws.N, cfg.paths);
    const double st = 0.5 * sigma_N(M);
    ws.Q_fM = st * st * quartic_Q(build_fM(M), beta);
    const double sN = sigma_N(ws.N);

    const std::size_t P = std::size_t(cfg.paths);
    ws.Q.resize(P);
    ws.cost.resize(P);
    ws.S.resize(P);
    parallel_for(P, [&](std::size_t p) {
        const WienerPath path(ws.N, {0.0, 0.5, 1.0}, cfg.seed, p);
        const WitnessDrift wd = witness_drift(path, M);
        ws.Q[p] = quartic_Q(wd.Theta0.with_cutoff(M), beta);
        ws.cost[p] = wd.theta0.cost();
        ws.S[p] = cutoff_value(path, wd.Theta0, sN);
    });
    return ws;
}

WitnessReport assemble(const WitnessSamples& ws, double sigma, const WitnessConfig& cfg)
{
    WitnessReport r;
    r.M = ws.M;
    r.N = ws.N;
    r.Q_fM = ws.Q_fM;
    r.L = cfg.L > 0.0 ? cfg.L : 10.0 * sigma * ws.Q_fM;
    r.K = cfg.K > 0.0 ? cfg.K : 10.0 * std::sqrt(sample_variance(ws.S));

    const std::size_t P = ws.Q.size();
    std::vector<double> q(P), inside(P), s2(P), cert(P);
    for (std::size_t p = 0; p < P; ++p) {
        q[p] = 0.5 * sigma * ws.Q[p];
        inside[p] = std::abs(ws.S[p]) <= r.K ? 1.0 : 0.0;
        s2[p] = ws.S[p] * ws.S[p];
        cert[p] = std::min(q[p], r.L) * inside[p] - ws.cost[p];
    }
    r.Q_Theta0 = mean_se(q);
    r.drift_cost = mean_se(ws.cost);
    r.cutoff_prob = mean_se(inside);
    r.cutoff_second_moment = mean_se(s2);
    r.certificate = mean_se(cert);
    r.inconclusive = r.cutoff_prob.value <= 0.5;
    return r;
}

}  // namespace

WitnessReport witness_certificate(const PotentialParams& params, int M, const WitnessConfig& cfg)
{
    if (!(params.sigma > 0.0)) throw ConfigError("the witness bound is for focusing coupling sigma > 0");
    return assemble(witness_samples(params.beta, M, cfg), params.sigma, cfg);
}

WitnessScan witness_scan(const PotentialParams& params, const std::vector<int>& Ms, const WitnessConfig& cfg)
{
    WitnessScan scan;
    std::vector<double> m, q, c;
    for (int M : Ms) {
        scan.reports.push_back(witness_certificate(params, M, cfg));
        m.push_back(M);
        q.push_back(scan.reports.back().Q_Theta0.value);
        c.push_back(scan.reports.back().drift_cost.value);
    }
    if (Ms.size() >= 2) {
        scan.Q_fit = loglog_fit(m, q);
        scan.cost_fit = loglog_fit(m, c);
    }
    return scan;
}

PhaseScan phase_scan_beta2(const std::vector<double>& sigmas, const std::vector<int>& Ms, const WitnessConfig& cfg)
{
    if (Ms.size() < 2) throw ConfigError("phase scan needs at least two values of M");
    PotentialParams params{2.0, 1.0, 0.0, 3.0};
    std::vector<WitnessSamples> samples;
    for (int M : Ms) samples.push_back(witness_samples(params.beta, M, cfg));

    PhaseScan scan;
    for (double sigma : sigmas) {
        if (!(sigma > 0.0)) throw ConfigError("phase scan needs sigma > 0");
        PhaseScanRow row;
        row.sigma = sigma;
        std::vector<double> m3, cert, mpos, cpos;
        for (const auto& ws : samples) {
            row.reports.push_back(assemble(ws, sigma, cfg));
            const double v = row.reports.back().certificate.value;
            m3.push_back(std::pow(double(ws.M), 3));
            cert.push_back(v);
            if (v > 0.0) {
                mpos.push_back(ws.M);
                cpos.push_back(v);
            }
        }
        const LineFit lf = linear_fit(m3, cert);
        row.coefficient = lf.slope;
        row.coefficient_se = lf.slope_se;
        if (mpos.size() >= 2) row.slope = loglog_fit(mpos, cpos).slope;
        scan.rows.push_back(std::move(row));
    }
    for (std::size_t i = 1; i < scan.rows.size(); ++i) {
        const auto& a = scan.rows[i - 1];
        const auto& b = scan.rows[i];
        if ((a.coefficient < 0.0) != (b.coefficient < 0.0)) {
            scan.threshold = a.sigma + (b.sigma - a.sigma) * a.coefficient / (a.coefficient - b.coefficient);
            break;
        }
    }
    return scan;
}

}  // namespace hp43
