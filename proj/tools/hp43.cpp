// Command-line driver for the hp43 experiments.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <variant>

#include "hp43/dynamics.hpp"
#include "hp43/energy.hpp"
#include "hp43/errors.hpp"
#include "hp43/fields.hpp"
#include "hp43/grid.hpp"
#include "hp43/parallel.hpp"
#include "hp43/renorm.hpp"
#include "hp43/spectral.hpp"
#include "hp43/stats.hpp"
#include "hp43/stochwave.hpp"
#include "hp43/variational.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace hp43;

namespace {

constexpr const char* kVersion = "1.0.0";

std::string format_double(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

using Cell = std::variant<double, long long, std::string>;

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add(std::vector<Cell> row)
    {
        if (row.size() != header_.size()) throw std::logic_error("CSV row width does not match the header");
        rows_.push_back(std::move(row));
    }

    void write(const fs::path& path) const
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ConfigError("cannot write " + path.string());
        write_row(out, header_);
        for (const auto& row : rows_) {
            std::vector<std::string> cells;
            for (const auto& c : row) {
                if (auto d = std::get_if<double>(&c)) cells.push_back(format_double(*d));
                else if (auto i = std::get_if<long long>(&c)) cells.push_back(std::to_string(*i));
                else cells.push_back(std::get<std::string>(c));
            }
            write_row(out, cells);
        }
    }

private:
    static void write_row(std::ostream& out, const std::vector<std::string>& cells)
    {
        for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
        out << '\n';
    }

    std::vector<std::string> header_;
    std::vector<std::vector<Cell>> rows_;
};

json estimate_json(const Estimate& e) { return {{"value", e.value}, {"se", e.se}}; }

// FNV-1a over the canonical config text.
std::string config_hash(const json& config)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : config.dump()) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// A subcommand's options, remembered so that the JSON config can fill the ones not given on the
// command line and the resolved values can be echoed into the outputs.
class Command {
public:
    Command(CLI::App& app, const std::string& name, const std::string& description)
        : sub_(app.add_subcommand(name, description))
    {
        sub_->set_help_flag("--help", "print this help message and exit");  // keeps --h free for the time step
    }

    template <class T>
    CLI::Option* add(const std::string& name, T& value, const std::string& description)
    {
        CLI::Option* opt = sub_->add_option("--" + name, value, description)->capture_default_str();
        if constexpr (requires { value.begin(); } && !std::is_same_v<T, std::string>) opt->delimiter(',');
        echo_.emplace_back(name, [&value] { return json(value); });
        options_[name] = opt;
        return opt;
    }

    CLI::Option* flag(const std::string& name, bool& value, const std::string& description)
    {
        CLI::Option* opt = sub_->add_flag("--" + name, value, description);
        echo_.emplace_back(name, [&value] { return json(value); });
        options_[name] = opt;
        return opt;
    }

    CLI::App* app() const { return sub_; }

    void apply_config(const json& file)
    {
        for (const auto& [key, value] : file.items()) {
            auto it = options_.find(key);
            if (it == options_.end()) throw ConfigError("unknown config key '" + key + "' for " + sub_->get_name());
            CLI::Option* opt = it->second;
            if (opt->count() > 0) continue;  // the command line wins
            auto as_text = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
            try {
                if (value.is_array()) {
                    for (const auto& v : value) opt->add_result(as_text(v));
                } else {
                    opt->add_result(as_text(value));
                }
                opt->run_callback();
            } catch (const CLI::Error& e) {
                throw ConfigError("config key '" + key + "': " + e.what());
            }
        }
    }

    json resolved() const
    {
        json j;
        for (const auto& [name, get] : echo_) j[name] = get();
        return j;
    }

private:
    CLI::App* sub_;
    std::vector<std::pair<std::string, std::function<json()>>> echo_;
    std::map<std::string, CLI::Option*> options_;
};

struct Context {
    std::string name;
    json config;
    fs::path out;
    std::uint64_t seed = 1;
    std::vector<std::string> files;

    fs::path file(const std::string& f)
    {
        files.push_back(f);
        return out / f;
    }

    void write_json(const std::string& f, json body)
    {
        json doc;
        doc["config"] = config;
        for (auto& [k, v] : body.items()) doc[k] = v;
        std::ofstream os(file(f), std::ios::binary);
        if (!os) throw ConfigError("cannot write " + (out / f).string());
        os << doc.dump(2) << '\n';
    }
};

struct Potential {
    double beta = 1.5;
    double sigma = 1.0;
    double A = 0.0;
    double gamma = 2.0;

    void add_to(Command& c)
    {
        c.add("beta", beta, "Bessel order of the potential");
        c.add("sigma", sigma, "coupling (negative: defocusing)");
        c.add("A", A, "taming strength");
        c.add("gamma", gamma, "taming exponent");
    }
    PotentialParams params() const { return {beta, sigma, A, gamma}; }
};

void require(bool ok, const std::string& msg)
{
    if (!ok) throw ConfigError(msg);
}

// renorm-table

struct RenormArgs {
    int N = 16;
    double beta = 1.5;
    int cn_paths = 0;
    bool cn_exact = false;
};

void run_renorm(Context& ctx, const RenormArgs& a)
{
    require(a.N >= 1, "N must be positive");
    RenormTable t = RenormTable::build(a.N, a.beta);
    json body;
    body["N"] = t.N;
    body["beta"] = t.beta;
    body["sigma_N"] = t.sigma_N;
    body["alpha_N"] = t.alpha_N;
    body["A_N"] = t.A_N;
    body["B_N"] = t.B_N;
    if (a.cn_exact) body["C_N_exact"] = c_N_exact(a.N, a.beta);
    if (a.cn_paths > 0) body["C_N_mc"] = estimate_json(c_N_monte_carlo(a.N, a.beta, {a.cn_paths, 32, ctx.seed}));
    body["kappa_csv"] = "kappa.csv";

    CsvTable kappa({"nx", "ny", "nz", "norm2", "kappa"});
    for (auto n : t.kappa.lattice().points())
        kappa.add({(long long)n.x, (long long)n.y, (long long)n.z, (long long)n.norm2(), t.kappa(n).real()});
    kappa.write(ctx.file("kappa.csv"));
    ctx.write_json("renorm.json", body);
}

// sample

struct SampleArgs {
    int N = 8;
    double s = 1.0;
    int replicas = 4;
    bool snapshots = false;
};

void run_sample(Context& ctx, const SampleArgs& a)
{
    require(a.N >= 1 && a.replicas >= 1, "N and replicas must be positive");
    double expected = 0.0;
    for (auto n : Lattice::get(a.N)->points()) expected += std::pow(n.bracket2(), -a.s);
    CsvTable csv({"replica", "norm2", "expected_norm2", "h_minus_half_norm2"});
    for (int r = 0; r < a.replicas; ++r) {
        const FourierField u = sample_mu({a.N, a.s, ctx.seed, std::uint64_t(r)});
        csv.add({(long long)r, u.norm2(), expected, u.sobolev_norm2(-0.5)});
        if (a.snapshots) {
            char name[32];
            std::snprintf(name, sizeof name, "sample_%04d.hp43", r);
            write_snapshot(ctx.file(name).string(), u);
        }
    }
    csv.write(ctx.file("samples.csv"));
}

// energy

struct EnergyArgs {
    int N = 8;
    Potential pot;
    int replicas = 100;
    std::string input;
    bool diamond2 = false;
};

void run_energy(Context& ctx, const EnergyArgs& a)
{
    require(a.N >= 1 && a.replicas >= 1, "N and replicas must be positive");
    RenormTable t = RenormTable::build(a.N, a.pot.beta);
    if (a.diamond2) t.C_N = Estimate{c_N_exact(a.N, a.pot.beta), 0.0};
    const PotentialParams p = a.pot.params();

    std::vector<FourierField> inputs;
    if (!a.input.empty()) inputs.push_back(read_snapshot(a.input));
    else
        for (int r = 0; r < a.replicas; ++r) inputs.push_back(sample_mu({a.N, 1.0, ctx.seed, std::uint64_t(r)}));

    std::vector<EnergyBreakdown> rows(inputs.size());
    parallel_for(inputs.size(), [&](std::size_t i) { rows[i] = energy_breakdown(inputs[i], p, t); });

    std::vector<std::string> header = {"replica", "R_N", "R_N_diamond", "script_R_N", "wick_mass", "Q_N", "Q1", "Q2", "Q3", "Q4"};
    if (a.diamond2) header.push_back("R_N_diamond2");
    CsvTable csv(header);
    std::map<std::string, std::vector<double>> cols;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& e = rows[i];
        std::vector<Cell> row = {(long long)i, e.R_N, e.R_N_diamond, e.script_R_N, e.wick_mass, e.Q_N, e.Q.Q1, e.Q.Q2, e.Q.Q3, e.Q.Q4};
        if (a.diamond2) row.push_back(*e.R_N_diamond2);
        for (std::size_t c = 1; c < row.size(); ++c) cols[header[c]].push_back(std::get<double>(row[c]));
        csv.add(std::move(row));
    }
    csv.write(ctx.file("energy.csv"));
    json summary;
    for (std::size_t c = 1; c < header.size(); ++c) summary[header[c]] = estimate_json(mean_se(cols[header[c]]));
    ctx.write_json("energy.json", {{"samples", rows.size()}, {"mean", summary}});
}

// objects

struct ObjectsArgs {
    int N = 8;
    double beta = 1.5;
    int replicas = 200;
};

void run_objects(Context& ctx, const ObjectsArgs& a)
{
    require(a.N >= 1 && a.replicas >= 2, "need N >= 1 and at least 2 replicas");
    const RenormTable t = RenormTable::build(a.N, a.beta);
    const FourierField S = resonant_sum(a.N, a.beta);
    const auto lat = Lattice::get(a.N);
    const std::size_t shells = std::size_t(a.N) * a.N + 1;
    const std::size_t R = std::size_t(a.replicas);

    // Per replica, shell sums of |Ẑ|² for the full object and each piece.
    constexpr int kPieces = 6;
    std::vector<std::vector<double>> acc(R, std::vector<double>(kPieces * shells, 0.0));
    std::vector<long long> count(shells, 0);
    for (auto n : lat->points()) ++count[std::size_t(n.norm2())];
    parallel_for(R, [&](std::size_t r) {
        const WavePair s = stationary_wave_pair(a.N, stream_for(ctx.seed, Draw::field, r));
        const ResonantObject z = resonant_object(s.pos, {a.beta}, t);
        const FourierField* parts[kPieces] = {&z.Z, &z.Z11, &z.Z12, &z.Z13, &z.Z14, &z.Z2};
        for (auto n : lat->points())
            for (int k = 0; k < kPieces; ++k) acc[r][k * shells + std::size_t(n.norm2())] += std::norm((*parts[k])(n));
    });

    CsvTable csv({"norm2", "bracket", "modes", "Z", "Z_se", "Z11", "Z11_se", "Z12", "Z12_se", "Z13", "Z13_se", "Z14",
                  "Z14_se", "Z2", "Z2_se", "Z13_exact"});
    std::vector<double> xs, ys;
    for (std::size_t sh = 1; sh < shells; ++sh) {
        if (count[sh] == 0) continue;
        std::vector<Cell> row = {(long long)sh, std::sqrt(1.0 + double(sh)), count[sh]};
        double mean_Z = 0.0;
        for (int k = 0; k < kPieces; ++k) {
            std::vector<double> v(R);
            for (std::size_t r = 0; r < R; ++r) v[r] = acc[r][k * shells + sh] / double(count[sh]);
            const Estimate e = mean_se(v);
            if (k == 0) mean_Z = e.value;
            row.push_back(e.value);
            row.push_back(e.se);
        }
        double exact = 0.0;
        for (auto n : lat->points())
            if (std::size_t(n.norm2()) == sh) exact += 4.0 * std::pow(S(n).real(), 2) / n.bracket2();
        row.push_back(exact / double(count[sh]));
        csv.add(std::move(row));
        xs.push_back(std::sqrt(1.0 + double(sh)));
        ys.push_back(mean_Z);
    }
    csv.write(ctx.file("objects.csv"));
    const LineFit fit = loglog_fit(xs, ys);
    ctx.write_json("objects.json", {{"shell_slope", fit.slope}, {"slope_se", fit.slope_se}, {"r_squared", fit.r_squared}});
}

// paraop

struct ParaopArgs {
    int N = 8;
    double t = 0.7;
    double tp = 0.3;
    double theta = 0.2;
    double c0 = 0.0;
    int in = -1;
    int out = -1;
    int iterations = 30;
    int replicas = 4;
};

void run_paraop(Context& ctx, const ParaopArgs& a)
{
    require(a.N >= 1 && a.replicas >= 1, "N and replicas must be positive");
    require(a.t > a.tp && a.tp >= 0.0, "need t > t' >= 0");
    const int in = a.in < 0 ? a.N : a.in;
    const int out = a.out < 0 ? a.N : a.out;
    CsvTable csv({"replica", "operator_norm", "frak_A_norm2"});
    std::vector<double> norms;
    for (int r = 0; r < a.replicas; ++r) {
        const RandomStream key = stream_for(ctx.seed, Draw::wave_noise, std::uint64_t(r));
        WavePair s = stationary_wave_pair(a.N, key.derive(0));
        const FourierField psi_tp = s.pos;
        LinearWaveStep(a.N, a.t - a.tp).apply(s, key.derive(1));
        const ParacontrolledOperator op(a.t, a.tp, psi_tp, s.pos, in, out, {a.theta, a.c0});
        const double norm = op.norm_estimate(a.iterations, key.derive(2));
        norms.push_back(norm);
        csv.add({(long long)r, norm, frak_A_field(a.t, a.tp, psi_tp, s.pos).norm2()});
    }
    csv.write(ctx.file("paraop.csv"));
    ctx.write_json("paraop.json", {{"operator_norm", estimate_json(mean_se(norms))}});
}

// evolve

struct EvolveArgs {
    int N = 8;
    Potential pot;
    std::string dynamics = "wave";
    double h = 0.01;
    double T = 1.0;
    int record_every = 10;
    std::string init;
    std::string snapshot_out;
    bool no_noise = false;
    bool no_damping = false;
    bool no_renormalize = false;
};

void run_evolve(Context& ctx, const EvolveArgs& a)
{
    require(a.dynamics == "wave" || a.dynamics == "heat", "dynamics must be wave or heat");
    const RenormTable t = RenormTable::build(a.N, a.pot.beta);
    const PotentialParams p = a.pot.params();
    IntegratorConfig cfg;
    cfg.scheme = a.dynamics == "wave" ? Scheme::strang_split : Scheme::exponential_euler;
    cfg.h = a.h;
    cfg.T = a.T;
    cfg.noise = !a.no_noise;
    cfg.damping = !a.no_damping;
    cfg.renormalize = !a.no_renormalize;
    cfg.record_every = a.record_every;
    cfg.validate();

    const RandomStream key = stream_for(ctx.seed, a.dynamics == "wave" ? Draw::wave_noise : Draw::heat_noise, 0);
    // Default start: a sample of the stationary law of the linear dynamics.
    WavePair init = stationary_wave_pair(a.N, stream_for(ctx.seed, Draw::field, 0));
    if (!a.init.empty()) init.pos = read_snapshot(a.init);
    require(init.pos.cutoff() == a.N, "initial snapshot cutoff differs from N");

    CsvTable csv(a.dynamics == "wave"
                     ? std::vector<std::string>{"time", "norm2", "wick_mass", "R_N", "script_R_N", "hamiltonian"}
                     : std::vector<std::string>{"time", "norm2", "wick_mass", "R_N", "script_R_N"});
    FourierField last;
    if (a.dynamics == "wave") {
        const WavePair end = evolve_sdnlw(init, p, t, cfg, key, [&](const WavePair& s) {
            csv.add({s.time, s.pos.norm2(), wick_mass(s.pos, t), r_N(s.pos, p, t), script_r_N(s.pos, p, t),
                     wave_hamiltonian(s, p, t)});
        });
        last = end.pos;
    } else {
        last = evolve_snlh(init.pos, p, t, cfg, key, [&](double time, const FourierField& u) {
            csv.add({time, u.norm2(), wick_mass(u, t), r_N(u, p, t), script_r_N(u, p, t)});
        });
    }
    csv.write(ctx.file("trajectory.csv"));
    if (!a.snapshot_out.empty()) write_snapshot(ctx.file(a.snapshot_out).string(), last);
}

// invariance

struct InvarianceArgs {
    int N = 4;
    Potential pot;
    std::string dynamics = "wave";
    double h = 0.02;
    double T = 200.0;
    double record_interval = 0.1;
    double burn_in_time = 5.0;
    int samples = 20000;
    int burn_in = 2000;
    int thin = 5;
    bool no_extrapolate = false;
    bool no_renormalize = false;
    double z = 3.0;
};

json comparison_json(const StatComparison& c)
{
    return {{"name", c.name}, {"dynamics", estimate_json(c.dynamics)}, {"reference", estimate_json(c.reference)},
            {"z", c.z}, {"pass", c.pass}};
}

void run_invariance(Context& ctx, const InvarianceArgs& a)
{
    require(a.dynamics == "wave" || a.dynamics == "heat", "dynamics must be wave or heat");
    const RenormTable t = RenormTable::build(a.N, a.pot.beta);
    InvarianceConfig cfg;
    cfg.dynamics = a.dynamics == "wave" ? DynamicsKind::wave : DynamicsKind::heat;
    cfg.integrator.scheme = a.dynamics == "wave" ? Scheme::strang_split : Scheme::exponential_euler;
    cfg.integrator.h = a.h;
    cfg.integrator.T = a.T;
    cfg.integrator.renormalize = !a.no_renormalize;
    cfg.mcmc.samples = a.samples;
    cfg.mcmc.burn_in = a.burn_in;
    cfg.mcmc.thin = a.thin;
    cfg.record_interval = a.record_interval;
    cfg.burn_in_time = a.burn_in_time;
    cfg.extrapolate = !a.no_extrapolate;
    cfg.z_threshold = a.z;
    const InvarianceReport r = invariance_test(a.pot.params(), t, cfg, ctx.seed);

    CsvTable csv({"statistic", "dynamics", "dynamics_se", "reference", "reference_se", "z", "pass"});
    auto add = [&](const StatComparison& c) {
        csv.add({c.name, c.dynamics.value, c.dynamics.se, c.reference.value, c.reference.se, c.z, (long long)c.pass});
    };
    json shells = json::array();
    for (const auto& c : r.shells) {
        add(c);
        shells.push_back(comparison_json(c));
    }
    add(r.wick_mass);
    add(r.energy);
    csv.write(ctx.file("invariance.csv"));
    ctx.write_json("invariance.json", {{"pass", r.pass},
                                       {"inconclusive", r.inconclusive},
                                       {"wick_mass", comparison_json(r.wick_mass)},
                                       {"energy", comparison_json(r.energy)},
                                       {"shells", shells},
                                       {"flagged_modes", r.flagged_modes},
                                       {"min_ess", r.min_ess},
                                       {"mcmc_acceptance", r.mcmc_acceptance}});
}

// partition

struct PartitionArgs {
    int N = 4;
    Potential pot{1.5, -1.0, 0.0, 2.0};
    int intervals = 8;
    int paths = 200;
    int max_iter = 25;
    std::string method = "lbfgs";
    bool no_force_feedback = false;
    int direct_samples = 0;
};

void run_partition(Context& ctx, const PartitionArgs& a)
{
    require(a.method == "lbfgs" || a.method == "momentum", "method must be lbfgs or momentum");
    const RenormTable t = RenormTable::build(a.N, a.pot.beta);
    DriftOptConfig cfg;
    cfg.method = a.method == "lbfgs" ? DriftOptimizer::lbfgs : DriftOptimizer::momentum;
    cfg.intervals = a.intervals;
    cfg.paths = a.paths;
    cfg.max_iter = a.max_iter;
    cfg.force_feedback = !a.no_force_feedback;
    cfg.seed = ctx.seed;
    const DriftOptimum opt = optimize_drift(a.pot.params(), t, cfg);
    auto bound = [](const BoundEstimate& b) { return json{{"value", b.value}, {"se", b.se}, {"noisy", b.noisy}}; };
    json body = {{"bound", bound(opt.bound)},
                 {"baseline", bound(opt.baseline)},
                 {"validation", bound(opt.validation)},
                 {"iterations", opt.iterations},
                 {"stalled", opt.stalled},
                 {"message", opt.message}};
    if (opt.validation.noisy) std::cerr << "warning: relative standard error of the bound above 10%\n";
    if (a.direct_samples > 0) {
        const DirectLogZ d = direct_neg_log_Z(a.pot.params(), t, a.direct_samples, ctx.seed);
        body["direct"] = {{"neg_log_Z", d.neg_log_Z}, {"se", d.se}, {"ess", d.ess}};
    }
    CsvTable csv({"interval", "norm2", "linear_gain", "force_gain"});
    for (int k = 0; k < opt.drift.intervals; ++k)
        for (long s = 0; s <= long(a.N) * a.N; ++s)
            csv.add({(long long)k, (long long)s, opt.drift.linear[opt.drift.index(k, s)], opt.drift.force[opt.drift.index(k, s)]});
    csv.write(ctx.file("drift_gains.csv"));
    ctx.write_json("partition.json", body);
}

// witness

struct WitnessArgs {
    Potential pot{1.5, 1.0, 0.0, 2.0};
    std::vector<int> M{8, 16, 32};
    int N = -1;
    int paths = 400;
    double L = -1.0;
    double K = -1.0;
};

void add_report_row(CsvTable& csv, const WitnessReport& r, std::vector<Cell> lead)
{
    for (Cell c : std::vector<Cell>{(long long)r.M, (long long)r.N, r.Q_Theta0.value, r.Q_Theta0.se, r.drift_cost.value,
                                    r.drift_cost.se, r.cutoff_prob.value, r.cutoff_prob.se,
                                    r.cutoff_second_moment.value, r.cutoff_second_moment.se, r.certificate.value,
                                    r.certificate.se, r.L, r.K, r.Q_fM, (long long)r.inconclusive})
        lead.push_back(c);
    csv.add(std::move(lead));
}

const std::vector<std::string> kReportColumns = {
    "M", "N", "Q_Theta0", "Q_Theta0_se", "drift_cost", "drift_cost_se", "cutoff_prob", "cutoff_prob_se",
    "cutoff_second_moment", "cutoff_second_moment_se", "certificate", "certificate_se", "L", "K", "Q_fM", "inconclusive"};

void run_witness(Context& ctx, const WitnessArgs& a)
{
    WitnessConfig cfg{a.N, a.paths, a.L, a.K, ctx.seed};
    const WitnessScan scan = witness_scan(a.pot.params(), a.M, cfg);
    CsvTable csv(kReportColumns);
    for (const auto& r : scan.reports) add_report_row(csv, r, {});
    csv.write(ctx.file("witness.csv"));
    json body;
    if (a.M.size() >= 2) {
        body["Q_Theta0_slope"] = {{"slope", scan.Q_fit.slope}, {"se", scan.Q_fit.slope_se}, {"r_squared", scan.Q_fit.r_squared}};
        body["drift_cost_slope"] = {{"slope", scan.cost_fit.slope}, {"se", scan.cost_fit.slope_se}, {"r_squared", scan.cost_fit.r_squared}};
    }
    bool inconclusive = false;
    for (const auto& r : scan.reports) inconclusive = inconclusive || r.inconclusive;
    body["inconclusive"] = inconclusive;
    ctx.write_json("witness.json", body);
}

// phase-scan

struct PhaseArgs {
    std::vector<double> sigmas{0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 4.0, 8.0};
    std::vector<int> M{8, 16, 32};
    int N = -1;
    int paths = 60;
};

void run_phase(Context& ctx, const PhaseArgs& a)
{
    WitnessConfig cfg{a.N, a.paths, -1.0, -1.0, ctx.seed};
    const PhaseScan ps = phase_scan_beta2(a.sigmas, a.M, cfg);
    std::vector<std::string> cols = {"sigma"};
    cols.insert(cols.end(), kReportColumns.begin(), kReportColumns.end());
    CsvTable detail(cols);
    CsvTable summary({"sigma", "coefficient", "coefficient_se", "slope"});
    for (const auto& row : ps.rows) {
        for (const auto& r : row.reports) add_report_row(detail, r, {row.sigma});
        summary.add({row.sigma, row.coefficient, row.coefficient_se, row.slope});
    }
    detail.write(ctx.file("phase_scan.csv"));
    summary.write(ctx.file("phase_scan_summary.csv"));
    ctx.write_json("phase_scan.json", {{"threshold", ps.threshold}, {"crossing_found", ps.threshold >= 0.0}});
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Simulation and verification toolkit for the Hartree Phi^4_3 model on the 3-torus"};
    app.require_subcommand(1);
    app.fallthrough();  // global options may follow the subcommand
    std::string config_path, out_dir = "hp43_out";
    std::uint64_t seed = 1;
    int threads = 0;
    double memory_cap_mb = 0.0;
    app.add_option("--config", config_path, "JSON file with flat keys mirroring the flags")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--seed", seed, "master seed")->capture_default_str();
    app.add_option("--threads", threads, "worker count (HP43_THREADS takes precedence)");
    app.add_option("--memory-cap-mb", memory_cap_mb, "largest FFT grid allowed, in MiB");
    app.set_version_flag("--version", kVersion);

    std::vector<std::unique_ptr<Command>> commands;
    std::map<CLI::App*, std::function<void(Context&)>> runners;
    auto command = [&](const std::string& name, const std::string& description) -> Command& {
        commands.push_back(std::make_unique<Command>(app, name, description));
        return *commands.back();
    };

    RenormArgs ra;
    {
        Command& c = command("renorm-table", "renormalization constants and the kappa table");
        c.add("N", ra.N, "frequency cutoff");
        c.add("beta", ra.beta, "Bessel order of the potential");
        c.add("cn-paths", ra.cn_paths, "Monte Carlo paths for C_N (0 skips it)");
        c.flag("cn-exact", ra.cn_exact, "also compute C_N from the exact contraction");
        runners[c.app()] = [&](Context& ctx) { run_renorm(ctx, ra); };
    }
    SampleArgs sa;
    {
        Command& c = command("sample", "Gaussian samples of mu_s");
        c.add("N", sa.N, "frequency cutoff");
        c.add("s", sa.s, "regularity (1: free field, 0: white noise)");
        c.add("replicas", sa.replicas, "number of samples");
        c.flag("snapshots", sa.snapshots, "write each sample as a binary snapshot");
        runners[c.app()] = [&](Context& ctx) { run_sample(ctx, sa); };
    }
    EnergyArgs ea;
    {
        Command& c = command("energy", "renormalized energies of mu samples or a snapshot");
        c.add("N", ea.N, "frequency cutoff");
        ea.pot.add_to(c);
        c.add("replicas", ea.replicas, "number of mu samples");
        c.add("input", ea.input, "snapshot to evaluate instead of samples");
        c.flag("diamond2", ea.diamond2, "also report R_N diamond-diamond (exact C_N)");
        runners[c.app()] = [&](Context& ctx) { run_energy(ctx, ea); };
    }
    ObjectsArgs oa;
    {
        Command& c = command("objects", "shell second moments of the resonant object and its pieces");
        c.add("N", oa.N, "frequency cutoff");
        c.add("beta", oa.beta, "Bessel order of the potential");
        c.add("replicas", oa.replicas, "stationary samples");
        runners[c.app()] = [&](Context& ctx) { run_objects(ctx, oa); };
    }
    ParaopArgs pa;
    {
        Command& c = command("paraop", "norm of the paracontrolled operator");
        c.add("N", pa.N, "frequency cutoff of Psi");
        c.add("t", pa.t, "later time");
        c.add("tp", pa.tp, "earlier time");
        c.add("theta", pa.theta, "frequency split exponent");
        c.add("c0", pa.c0, "frequency split offset");
        c.add("in-cutoff", pa.in, "input cutoff (default N)");
        c.add("out-cutoff", pa.out, "output cutoff (default N)");
        c.add("iterations", pa.iterations, "power iterations");
        c.add("replicas", pa.replicas, "independent Psi paths");
        runners[c.app()] = [&](Context& ctx) { run_paraop(ctx, pa); };
    }
    EvolveArgs va;
    {
        Command& c = command("evolve", "integrate the truncated wave or heat dynamics");
        c.add("N", va.N, "frequency cutoff");
        va.pot.add_to(c);
        c.add("dynamics", va.dynamics, "wave or heat");
        c.add("h", va.h, "time step");
        c.add("T", va.T, "horizon");
        c.add("record-every", va.record_every, "steps between recorded rows");
        c.add("init", va.init, "initial snapshot (default: a mu sample)");
        c.add("snapshot-out", va.snapshot_out, "write the final state to this file in the output directory");
        c.flag("no-noise", va.no_noise, "drop the stochastic forcing");
        c.flag("no-damping", va.no_damping, "drop the damping (wave only)");
        c.flag("no-renormalize", va.no_renormalize, "omit sigma_N from the Wick square");
        runners[c.app()] = [&](Context& ctx) { run_evolve(ctx, va); };
    }
    InvarianceArgs ia;
    {
        Command& c = command("invariance", "compare dynamics time averages with the Gibbs measure");
        c.add("N", ia.N, "frequency cutoff");
        ia.pot.add_to(c);
        c.add("dynamics", ia.dynamics, "wave or heat");
        c.add("h", ia.h, "coarse time step");
        c.add("T", ia.T, "horizon");
        c.add("record-interval", ia.record_interval, "model time between recorded states");
        c.add("burn-in-time", ia.burn_in_time, "model time discarded at the start");
        c.add("samples", ia.samples, "reference chain samples");
        c.add("burn-in", ia.burn_in, "reference chain burn-in");
        c.add("thin", ia.thin, "reference chain thinning");
        c.flag("no-extrapolate", ia.no_extrapolate, "skip the step-size extrapolation");
        c.flag("no-renormalize", ia.no_renormalize, "control run without sigma_N in the dynamics");
        c.add("z", ia.z, "pass threshold in combined standard errors");
        runners[c.app()] = [&](Context& ctx) { run_invariance(ctx, ia); };
    }
    PartitionArgs pta;
    {
        Command& c = command("partition", "variational upper bound on -log Z_N");
        c.add("N", pta.N, "frequency cutoff");
        pta.pot.add_to(c);
        c.add("intervals", pta.intervals, "time intervals of the drift");
        c.add("paths", pta.paths, "Wiener paths in the training ensemble");
        c.add("max-iter", pta.max_iter, "optimizer iterations");
        c.add("method", pta.method, "lbfgs or momentum");
        c.flag("no-force-feedback", pta.no_force_feedback, "optimize only the linear feedback gains");
        c.add("direct-samples", pta.direct_samples, "direct Monte Carlo samples for comparison (0 skips it)");
        runners[c.app()] = [&](Context& ctx) { run_partition(ctx, pta); };
    }
    WitnessArgs wa;
    {
        Command& c = command("witness", "non-normalizability witness certificates over M");
        wa.pot.add_to(c);
        c.add("M", wa.M, "comma-separated frequency scales");
        c.add("N", wa.N, "cutoff of Y (default 2M)");
        c.add("paths", wa.paths, "Wiener paths per M");
        c.add("L", wa.L, "cap in min(sigma R, L) (default 10 sigma sigma_M^2 Q(f_M))");
        c.add("K", wa.K, "cutoff event threshold (default 10 SD)");
        runners[c.app()] = [&](Context& ctx) { run_witness(ctx, wa); };
    }
    PhaseArgs pha;
    {
        Command& c = command("phase-scan", "beta = 2 witness scan over sigma");
        c.add("sigmas", pha.sigmas, "comma-separated couplings");
        c.add("M", pha.M, "comma-separated frequency scales");
        c.add("N", pha.N, "cutoff of Y (default 2M)");
        c.add("paths", pha.paths, "Wiener paths per M");
        runners[c.app()] = [&](Context& ctx) { run_phase(ctx, pha); };
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const auto start = std::chrono::steady_clock::now();
    try {
        CLI::App* sub = app.get_subcommands().front();
        Command* cmd = nullptr;
        for (auto& c : commands)
            if (c->app() == sub) cmd = c.get();

        json file_config = json::object();
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            try {
                file_config = json::parse(in);
            } catch (const json::exception& e) {
                throw ConfigError(std::string("config file: ") + e.what());
            }
            if (!file_config.is_object()) throw ConfigError("config file must hold a JSON object");
            // Global keys may also come from the file.
            if (file_config.contains("seed") && app.get_option("--seed")->count() == 0) seed = file_config["seed"].get<std::uint64_t>();
            if (file_config.contains("out") && app.get_option("--out")->count() == 0) out_dir = file_config["out"].get<std::string>();
            if (file_config.contains("threads") && app.get_option("--threads")->count() == 0) threads = file_config["threads"].get<int>();
            for (const char* k : {"seed", "out", "threads"}) file_config.erase(k);
        }
        cmd->apply_config(file_config);
        if (threads > 0) set_worker_count(threads);
        if (memory_cap_mb > 0.0) set_grid_memory_cap(std::size_t(memory_cap_mb * 1024.0 * 1024.0));

        Context ctx;
        ctx.name = sub->get_name();
        ctx.seed = seed;
        ctx.out = out_dir;
        ctx.config = cmd->resolved();
        ctx.config["seed"] = seed;
        fs::create_directories(ctx.out);
        runners.at(sub)(ctx);

        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        json manifest = {{"subcommand", ctx.name},
                         {"config", ctx.config},
                         {"config_hash", config_hash(ctx.config)},
                         {"seed", seed},
                         {"versions",
                          {{"hp43", kVersion},
                           {"fft", fft_library_version()},
                           {"compiler", __VERSION__},
                           {"cli11", CLI11_VERSION},
                           {"json",
                            std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                                "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}},
                         {"workers", worker_count()},
                         {"wall_time_s", wall},
                         {"outputs", ctx.files}};
        std::ofstream(ctx.out / "manifest.json", std::ios::binary) << manifest.dump(2) << '\n';
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const ResourceError& e) {
        std::cerr << "resource error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalGuardError& e) {
        std::cerr << "numerical guard: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
