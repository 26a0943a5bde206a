#include "hp43/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "hp43/energy.hpp"
#include "hp43/errors.hpp"
#include "hp43/fields.hpp"
#include "hp43/parallel.hpp"

namespace hp43 {

namespace {

constexpr double kGuardEps = 0.1;

long step_count(const IntegratorConfig& cfg) { return std::lround(cfg.T / cfg.h); }

// Position in the state lattice of every point of the radius-N ball.
std::vector<std::size_t> low_mode_map(const Lattice& state, int N)
{
    const auto low = Lattice::get(N);
    std::vector<std::size_t> map(low->size());
    for (std::size_t i = 0; i < low->size(); ++i) map[i] = std::size_t(state.find((*low)[i]));
    return map;
}

void add_scaled(FourierField& target, const std::vector<std::size_t>& map, const FourierField& f, double h)
{
    auto t = target.coeffs();
    const auto c = f.coeffs();
    for (std::size_t i = 0; i < map.size(); ++i) t[map[i]] += h * c[i];
}

void guard(double norm2, double bound, double time)
{
    if (!(norm2 <= bound * bound))
        throw NumericalGuardError("blow-up guard tripped at t = " + std::to_string(time) +
                                  " (norm " + std::to_string(std::sqrt(norm2)) + ")");
}

FourierField nonlinear_force(const FourierField& u, const PotentialParams& params, const RenormTable& table,
                             const IntegratorConfig& cfg)
{
    return hartree_force(u, params, table, cfg.renormalize);
}

// Exact Ornstein–Uhlenbeck step du = −⟨n⟩²u dt + √2 dB, optionally with an exponential-Euler
// forcing term (1 − e^{−λh})/λ·F(n).
class OuStep {
public:
    OuStep(int M, double h, bool noise) : noise_(noise)
    {
        const auto lat = Lattice::get(M);
        decay_.resize(lat->size());
        gain_.resize(lat->size());
        sd_.resize(lat->size());
        for (std::size_t i = 0; i < lat->size(); ++i) {
            const double lam = (*lat)[i].bracket2();
            decay_[i] = std::exp(-lam * h);
            gain_[i] = -std::expm1(-lam * h) / lam;
            sd_[i] = std::sqrt(-std::expm1(-2.0 * lam * h) / lam);
        }
    }

    void apply(FourierField& u, const RandomStream& key, const FourierField* force = nullptr,
               const std::vector<std::size_t>* map = nullptr) const
    {
        const auto& lat = u.lattice();
        auto c = u.coeffs();
        for (std::size_t i = 0; i < lat.size(); ++i) c[i] *= decay_[i];
        if (force) {
            const auto f = force->coeffs();
            for (std::size_t i = 0; i < map->size(); ++i) c[(*map)[i]] += gain_[(*map)[i]] * f[i];
        }
        if (!noise_) return;
        for (std::size_t i = 0; i < lat.size(); ++i) {
            const auto n = lat[i];
            if (n.is_zero()) {
                RandomStream r = key.derive(n.packed());
                c[i] += sd_[i] * r.normal();
            } else if (n.in_lambda()) {
                RandomStream r = key.derive(n.packed());
                const Complex g = sd_[i] * r.complex_normal();
                c[i] += g;
                c[lat.mirror(i)] += std::conj(g);
            }
        }
    }

private:
    bool noise_;
    std::vector<double> decay_, gain_, sd_;
};

}  // namespace

void IntegratorConfig::validate() const
{
    if (!(h > 0)) throw ConfigError("step size h must be positive");
    if (!(T >= h)) throw ConfigError("horizon T must be at least h");
    if (record_every < 1) throw ConfigError("record_every must be at least 1");
    if (!(blowup_bound > 0)) throw ConfigError("blow-up bound must be positive");
}

WavePair evolve_sdnlw(WavePair s, const PotentialParams& params, const RenormTable& table,
                      const IntegratorConfig& cfg, const RandomStream& key, const WaveObserver& observe)
{
    cfg.validate();
    if (cfg.noise && !cfg.damping) throw ConfigError("the noisy wave dynamics needs damping");
    if (s.pos.cutoff() < table.N || s.vel.cutoff() != s.pos.cutoff() || s.pos.is_real() != s.vel.is_real())
        throw ConfigError("wave state must share a cutoff of at least N");
    const int M = s.cutoff();
    const double h = cfg.h;
    const auto map = low_mode_map(s.pos.lattice(), table.N);
    const bool strang = cfg.scheme == Scheme::strang_split;
    const LinearWaveStep linear(M, strang ? 0.5 * h : h, cfg.damping, cfg.noise);

    auto kick = [&](WavePair& st) {
        if (cfg.nonlinear) add_scaled(st.vel, map, nonlinear_force(st.pos, params, table, cfg), h);
    };

    if (observe) observe(s);
    const long steps = step_count(cfg);
    for (long k = 1; k <= steps; ++k) {
        const RandomStream sk = key.derive(std::uint64_t(k));
        if (strang) {
            linear.apply(s, sk.derive(0));
            kick(s);
            linear.apply(s, sk.derive(1));
        } else {
            kick(s);
            linear.apply(s, sk.derive(0));
        }
        guard(s.pos.sobolev_norm2(-0.5 - kGuardEps) + s.vel.sobolev_norm2(-1.5 - kGuardEps), cfg.blowup_bound,
              s.time);
        if (observe && k % cfg.record_every == 0) observe(s);
    }
    return s;
}

FourierField evolve_snlh(FourierField u, const PotentialParams& params, const RenormTable& table,
                         const IntegratorConfig& cfg, const RandomStream& key, const FieldObserver& observe)
{
    cfg.validate();
    if (u.cutoff() < table.N) throw ConfigError("heat state cutoff must be at least N");
    const int M = u.cutoff();
    const double h = cfg.h;
    const auto map = low_mode_map(u.lattice(), table.N);
    const bool strang = cfg.scheme == Scheme::strang_split;
    const OuStep ou(M, strang ? 0.5 * h : h, cfg.noise);

    double t = 0.0;
    if (observe) observe(t, u);
    const long steps = step_count(cfg);
    for (long k = 1; k <= steps; ++k) {
        const RandomStream sk = key.derive(std::uint64_t(k));
        if (strang) {
            ou.apply(u, sk.derive(0));
            if (cfg.nonlinear) add_scaled(u, map, nonlinear_force(u, params, table, cfg), h);
            ou.apply(u, sk.derive(1));
        } else if (cfg.nonlinear) {
            const FourierField f = nonlinear_force(u, params, table, cfg);
            ou.apply(u, sk.derive(0), &f, &map);
        } else {
            ou.apply(u, sk.derive(0));
        }
        t = double(k) * h;
        guard(u.sobolev_norm2(-0.5 - kGuardEps), cfg.blowup_bound, t);
        if (observe && k % cfg.record_every == 0) observe(t, u);
    }
    return u;
}

double wave_hamiltonian(const WavePair& s, const PotentialParams& params, const RenormTable& table)
{
    return 0.5 * s.pos.sobolev_norm2(1.0) + 0.5 * s.vel.norm2() - script_r_N(s.pos, params, table);
}

MalaKernel::MalaKernel(const PotentialParams& params, const RenormTable& table, double delta)
    : params_(params), table_(&table), delta_(delta)
{
    if (!(delta > 0)) throw ConfigError("MALA step must be positive");
}

double MalaKernel::log_target(const FourierField& u) const
{
    return script_r_N(u, params_, *table_) - 0.5 * u.sobolev_norm2(1.0);
}

// C∇𝓡_N(u), with C the covariance of μ on |n| ≤ N.
FourierField MalaKernel::drift(const FourierField& u) const
{
    return hartree_force(u, params_, *table_).apply_multiplier([](FrequencyIndex n) { return 1.0 / n.bracket2(); });
}

FourierField MalaKernel::propose(const FourierField& u, RandomStream& rng) const
{
    const double d = delta_;
    const double a = (2.0 - d) / (2.0 + d), b = 2.0 * d / (2.0 + d), s = std::sqrt(8.0 * d) / (2.0 + d);
    FourierField v = a * u + b * drift(u);
    const FourierField xi = keyed_gaussian_field(u.cutoff(), rng.derive(rng.next_u64()),
                                                 [](FrequencyIndex n) { return 1.0 / n.bracket2(); });
    v += s * xi;
    return v;
}

double MalaKernel::log_proposal(const FourierField& from, const FourierField& to) const
{
    const double d = delta_;
    const double a = (2.0 - d) / (2.0 + d), b = 2.0 * d / (2.0 + d), s2 = 8.0 * d / ((2.0 + d) * (2.0 + d));
    const FourierField r = to - (a * from + b * drift(from));
    return -r.sobolev_norm2(1.0) / (2.0 * s2);
}

double MalaKernel::log_accept_ratio(const FourierField& u, const FourierField& v) const
{
    return log_target(v) + log_proposal(v, u) - log_target(u) - log_proposal(u, v);
}

bool MalaKernel::step(FourierField& u, RandomStream& rng) const
{
    const FourierField v = propose(u, rng);
    if (std::log(rng.uniform()) < log_accept_ratio(u, v)) {
        u = v;
        return true;
    }
    return false;
}

McmcSummary gibbs_reference(const PotentialParams& params, const RenormTable& table, const McmcConfig& cfg,
                            const RandomStream& key, const std::function<void(const FourierField&)>& observe)
{
    if (cfg.samples < 1 || cfg.burn_in < 0 || cfg.thin < 1) throw ConfigError("invalid MCMC lengths");
    const int N = table.N;
    MalaKernel kernel(params, table, cfg.delta);
    RandomStream rng = key.derive(1);
    FourierField u = keyed_gaussian_field(N, key.derive(2), [](FrequencyIndex n) { return 1.0 / n.bracket2(); });

    // Cached log π and proposal mean so each step evaluates the model once, at the proposal.
    struct Point {
        double logpi;
        FourierField mean;
    };
    auto evaluate = [&](const FourierField& x, double d) {
        const double a = (2.0 - d) / (2.0 + d), b = 2.0 * d / (2.0 + d);
        const ForceEnergy fe = hartree_force_energy(x, params, table);
        return Point{fe.script_R_N - 0.5 * x.sobolev_norm2(1.0),
                     a * x + b * fe.force.apply_multiplier([](FrequencyIndex n) { return 1.0 / n.bracket2(); })};
    };
    Point cur = evaluate(u, kernel.delta());
    double& logpi = cur.logpi;
    FourierField& mean = cur.mean;

    auto advance = [&](long k) {
        const double d = kernel.delta();
        const double s2 = 8.0 * d / ((2.0 + d) * (2.0 + d));
        RandomStream r = rng.derive(std::uint64_t(k));
        const FourierField xi = keyed_gaussian_field(N, r.derive(0), [](FrequencyIndex n) { return 1.0 / n.bracket2(); });
        const FourierField v = mean + std::sqrt(s2) * xi;
        Point pv = evaluate(v, d);
        const double logpi_v = pv.logpi;
        const FourierField& mean_v = pv.mean;
        const double fwd = -(v - mean).sobolev_norm2(1.0) / (2.0 * s2);
        const double bwd = -(u - mean_v).sobolev_norm2(1.0) / (2.0 * s2);
        RandomStream ur = r.derive(1);
        if (std::log(ur.uniform()) < logpi_v + bwd - logpi - fwd) {
            u = v;
            cur = std::move(pv);
            return true;
        }
        return false;
    };

    long k = 0;
    int window_accepts = 0, window = 0;
    for (int i = 0; i < cfg.burn_in; ++i) {
        window_accepts += advance(++k);
        if (cfg.adapt && ++window == 50) {
            const double rate = double(window_accepts) / window;
            const double d = std::clamp(kernel.delta() * std::exp(2.0 * (rate - cfg.target_accept)), 1e-4, 2.0);
            kernel.set_delta(d);
            cur = evaluate(u, d);
            window = window_accepts = 0;
        }
    }

    long accepts = 0, proposals = 0;
    std::vector<double> mass;
    mass.reserve(std::size_t(cfg.samples));
    const bool extend = cfg.high_cutoff > N;
    const RandomStream high_key = key.derive(3);
    for (int s = 0; s < cfg.samples; ++s) {
        for (int t = 0; t < cfg.thin; ++t) {
            accepts += advance(++k);
            ++proposals;
        }
        mass.push_back(wick_mass(u, table));
        if (!observe) continue;
        if (extend) {
            FourierField full = keyed_gaussian_field(cfg.high_cutoff, high_key.derive(std::uint64_t(s)),
                                                     [](FrequencyIndex n) { return 1.0 / n.bracket2(); });
            auto fc = full.coeffs();
            const auto uc = u.coeffs();
            const auto map = low_mode_map(full.lattice(), N);
            for (std::size_t i = 0; i < map.size(); ++i) fc[map[i]] = uc[i];
            observe(full);
        } else {
            observe(u);
        }
    }

    McmcSummary out;
    out.acceptance = double(accepts) / double(proposals);
    out.delta = kernel.delta();
    out.iat = integrated_autocorr_time(mass);
    out.last = u;
    if (out.iat > cfg.max_iat)
        throw NumericalGuardError("MCMC chain is not mixing: autocorrelation time " + std::to_string(out.iat));
    return out;
}

namespace {

struct StatLayout {
    std::vector<long> shell_keys;               // |n|² per shell
    std::vector<int> shell_of;                  // per lattice point of the N-ball
    std::vector<int> shell_size;
    std::vector<std::size_t> mode_index;        // points of Λ ∪ {0}
    std::size_t count() const { return shell_keys.size() + mode_index.size() + 2; }
};

StatLayout make_layout(int N)
{
    StatLayout L;
    const auto lat = Lattice::get(N);
    std::map<long, int> ids;
    for (const auto& n : lat->points()) ids.emplace(n.norm2(), 0);
    int id = 0;
    for (auto& [k, v] : ids) {
        v = id++;
        L.shell_keys.push_back(k);
    }
    L.shell_size.assign(L.shell_keys.size(), 0);
    for (std::size_t i = 0; i < lat->size(); ++i) {
        const auto n = (*lat)[i];
        L.shell_of.push_back(ids[n.norm2()]);
        ++L.shell_size[std::size_t(ids[n.norm2()])];
        if (n.is_zero() || n.in_lambda()) L.mode_index.push_back(i);
    }
    return L;
}

std::vector<double> statistics(const FourierField& u0, const StatLayout& L, const PotentialParams& params,
                               const RenormTable& table)
{
    const FourierField u = u0.cutoff() == table.N ? u0 : u0.with_cutoff(table.N);
    std::vector<double> s(L.count(), 0.0);
    const auto c = u.coeffs();
    const std::size_t ns = L.shell_keys.size();
    for (std::size_t i = 0; i < c.size(); ++i) s[std::size_t(L.shell_of[i])] += std::norm(c[i]);
    for (std::size_t k = 0; k < ns; ++k) s[k] /= L.shell_size[k];
    for (std::size_t m = 0; m < L.mode_index.size(); ++m) s[ns + m] = std::norm(c[L.mode_index[m]]);
    s[ns + L.mode_index.size()] = wick_mass(u, table);
    s[ns + L.mode_index.size() + 1] = r_N(u, params, table);
    return s;
}

struct SeriesEstimate {
    Estimate est;
    double ess = 0.0;
};

SeriesEstimate estimate_series(const std::vector<double>& xs)
{
    const double tau = integrated_autocorr_time(xs);
    const std::size_t n = xs.size();
    const std::size_t batch_len = std::size_t(std::ceil(20.0 * tau));
    const std::size_t batches = std::max<std::size_t>(2, n / std::max<std::size_t>(batch_len, 1));
    return {batch_means(xs, batches), double(n) / tau};
}

std::vector<SeriesEstimate> estimate_all(const std::vector<std::vector<double>>& rows)
{
    std::vector<SeriesEstimate> out;
    if (rows.empty()) return out;
    std::vector<double> col(rows.size());
    for (std::size_t j = 0; j < rows[0].size(); ++j) {
        for (std::size_t i = 0; i < rows.size(); ++i) col[i] = rows[i][j];
        out.push_back(estimate_series(col));
    }
    return out;
}

std::vector<std::vector<double>> run_dynamics(const PotentialParams& params, const RenormTable& table,
                                              const InvarianceConfig& cfg, const StatLayout& L, double h,
                                              const FourierField& u0, const RandomStream& key)
{
    IntegratorConfig ic = cfg.integrator;
    ic.h = h;
    ic.T = cfg.integrator.T + cfg.burn_in_time;
    ic.record_every = std::max(1, int(std::lround(cfg.record_interval / h)));
    const long skip = std::lround(cfg.burn_in_time / (ic.record_every * h));
    std::vector<std::vector<double>> rows;
    long seen = 0;
    if (cfg.dynamics == DynamicsKind::wave) {
        WavePair s;
        s.pos = u0;
        s.vel = keyed_gaussian_field(u0.cutoff(), key.derive(1), [](FrequencyIndex) { return 1.0; });
        evolve_sdnlw(s, params, table, ic, key.derive(2), [&](const WavePair& st) {
            if (seen++ > skip) rows.push_back(statistics(st.pos, L, params, table));
        });
    } else {
        evolve_snlh(u0, params, table, ic, key.derive(2), [&](double, const FourierField& u) {
            if (seen++ > skip) rows.push_back(statistics(u, L, params, table));
        });
    }
    return rows;
}

StatComparison compare(std::string name, const Estimate& dyn, const Estimate& ref, double threshold)
{
    StatComparison c{std::move(name), dyn, ref, z_score(dyn, ref), true};
    c.pass = std::abs(c.z) <= threshold;
    return c;
}

std::string mode_name(FrequencyIndex n)
{
    return "|u(" + std::to_string(n.x) + "," + std::to_string(n.y) + "," + std::to_string(n.z) + ")|^2";
}

}  // namespace

InvarianceReport invariance_test(const PotentialParams& params, const RenormTable& table, const InvarianceConfig& cfg,
                                 std::uint64_t seed)
{
    cfg.integrator.validate();
    if (table.N > 6) throw ConfigError("invariance test is limited to N <= 6");
    if (!(cfg.record_interval >= cfg.integrator.h)) throw ConfigError("record interval must be at least h");
    const StatLayout L = make_layout(table.N);

    // Reference chain, then dynamics started from its final state.
    std::vector<std::vector<double>> ref_rows;
    const McmcSummary mc = gibbs_reference(params, table, cfg.mcmc, stream_for(seed, Draw::mcmc, 0),
                                           [&](const FourierField& u) { ref_rows.push_back(statistics(u, L, params, table)); });
    const FourierField u0 = mc.last;

    const double h = cfg.integrator.h;
    std::vector<std::vector<std::vector<double>>> dyn_rows(cfg.extrapolate ? 2 : 1);
    const Draw draw = cfg.dynamics == DynamicsKind::wave ? Draw::wave_noise : Draw::heat_noise;
    parallel_for(dyn_rows.size(), [&](std::size_t i) {
        dyn_rows[i] = run_dynamics(params, table, cfg, L, i == 0 ? h : 0.5 * h, u0, stream_for(seed, draw, i));
    });

    const auto ref = estimate_all(ref_rows);
    const auto coarse = estimate_all(dyn_rows[0]);
    std::vector<SeriesEstimate> dyn = coarse;
    if (cfg.extrapolate) {
        const auto fine = estimate_all(dyn_rows[1]);
        // Richardson weights for weak order p: (2^p S(h/2) − S(h))/(2^p − 1).
        const double p2 = cfg.integrator.scheme == Scheme::strang_split ? 4.0 : 2.0;
        const double wf = p2 / (p2 - 1.0), wc = 1.0 / (p2 - 1.0);
        for (std::size_t j = 0; j < dyn.size(); ++j) {
            dyn[j].est.value = wf * fine[j].est.value - wc * coarse[j].est.value;
            dyn[j].est.se = std::hypot(wf * fine[j].est.se, wc * coarse[j].est.se);
            dyn[j].ess = std::min(fine[j].ess, coarse[j].ess);
        }
    }

    InvarianceReport rep;
    rep.mcmc_acceptance = mc.acceptance;
    rep.min_ess = INFINITY;
    const std::size_t ns = L.shell_keys.size(), nm = L.mode_index.size();
    const auto lat = Lattice::get(table.N);
    for (std::size_t j = 0; j < L.count(); ++j) rep.min_ess = std::min({rep.min_ess, ref[j].ess, dyn[j].ess});
    for (std::size_t k = 0; k < ns; ++k)
        rep.shells.push_back(compare("shell |n|^2=" + std::to_string(L.shell_keys[k]), dyn[k].est, ref[k].est, cfg.z_threshold));
    for (std::size_t m = 0; m < nm; ++m) {
        rep.modes.push_back(compare(mode_name((*lat)[L.mode_index[m]]), dyn[ns + m].est, ref[ns + m].est, cfg.z_threshold));
        rep.flagged_modes += !rep.modes.back().pass;
    }
    rep.wick_mass = compare("wick mass", dyn[ns + nm].est, ref[ns + nm].est, cfg.z_threshold);
    rep.energy = compare("R_N", dyn[ns + nm + 1].est, ref[ns + nm + 1].est, cfg.z_threshold);

    rep.inconclusive = rep.min_ess < cfg.min_ess;
    bool ok = rep.wick_mass.pass && rep.energy.pass;
    for (const auto& s : rep.shells) ok = ok && s.pass;
    rep.pass = ok && !rep.inconclusive;
    return rep;
}

}  // namespace hp43
