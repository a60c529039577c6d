// Batch front end: parses a config (key=value file plus flag overrides),
// orchestrates the library pipelines, and writes CSV reports with a JSON
// manifest per run.  All outputs are deterministic: identical configuration
// yields byte-identical files, independently of --threads.
//
// Exit codes: 0 ok, 2 config, 3 construction, 4 numerical singularity,
// 5 feasibility.  Failures print a single machine-parsable line on stderr.

#include <CLI11.hpp>
#include <json.hpp>

#include <fermibos/dynamics.hpp>
#include <fermibos/energy.hpp>
#include <fermibos/fockoracle.hpp>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fermibos;

namespace {

constexpr const char* tool_version = "0.1.0";

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// filename-safe momentum tag: (0,0,-1) -> "0_0_m1"
std::string mom_tag(Momentum k) {
    auto c = [](int64_t v) {
        return v < 0 ? "m" + std::to_string(-v) : std::to_string(v);
    };
    return c(k.x) + "_" + c(k.y) + "_" + c(k.z);
}

std::string one_line(std::string s) {
    for (char& c : s)
        if (c == '\n' || c == '\r') c = ' ';
    return s;
}

const char* code_name(errc c) {
    switch (c) {
        case errc::config: return "config";
        case errc::construction: return "construction";
        case errc::singularity: return "singularity";
        case errc::feasibility: return "feasibility";
        default: return "ok";
    }
}

// bounded worker pool over an index range; results land in caller-owned
// slots, so output order never depends on scheduling
void parallel_for(int64_t n, int threads, const std::function<void(int64_t)>& fn) {
    if (threads <= 1 || n <= 1) {
        for (int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int64_t> next{0};
    std::mutex emu;
    std::exception_ptr first;
    auto worker = [&] {
        for (;;) {
            int64_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(emu);
                if (!first) first = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    int np = int(std::min<int64_t>(threads, n));
    pool.reserve(size_t(np));
    for (int t = 0; t < np; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first) std::rethrow_exception(first);
}

struct CommonOpts {
    double kf = 5.0;
    double delta = 2.0 / 45.0;
    std::string patches = "auto";
    double rv = 2.0;
    std::string potential_file;
    std::string out_dir = "out";
    int threads = 1;
    bool strict = false;
};

PotentialSpec load_potential(const std::string& path, bool strict,
                             std::vector<std::string>* warnings) {
    if (path.empty()) return PotentialSpec(); // V == 0
    std::ifstream in(path);
    if (!in) throw config_error("cannot open potential file " + path);
    std::map<Momentum, double> entries;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream is(line);
        int64_t x, y, z;
        double v;
        if (!(is >> x)) continue; // blank or comment-only
        if (!(is >> y >> z >> v))
            throw config_error("potential file " + path + " line " + std::to_string(lineno) +
                               ": expected 'kx ky kz value'");
        Momentum k{x, y, z};
        if (entries.count(k))
            throw config_error("potential file " + path + ": duplicate entry at k=" + k.str());
        entries[k] = v;
    }
    return PotentialSpec::from_entries(std::move(entries), strict, warnings);
}

int resolve_patches(const std::string& spec, int64_t num_particles, double delta) {
    if (spec == "auto") return auto_patch_count(num_particles, delta);
    try {
        size_t pos = 0;
        int m = std::stoi(spec, &pos);
        if (pos != spec.size() || m < 2) throw std::invalid_argument("");
        return m;
    } catch (const std::exception&) {
        throw config_error("--patches must be 'auto' or an integer >= 2, got '" + spec + "'");
    }
}

// collects artifacts for one run and writes the manifest last
struct RunContext {
    fs::path dir;
    json manifest;

    RunContext(const std::string& command, const CommonOpts& o, const PotentialSpec& pot,
               const std::vector<std::string>& warnings)
        : dir(o.out_dir) {
        fs::create_directories(dir);
        manifest["tool"] = "fermibos";
        manifest["version"] = tool_version;
        manifest["command"] = command;
        json pm;
        pm["kf"] = o.kf;
        pm["delta"] = o.delta;
        pm["patches"] = o.patches;
        pm["rv"] = o.rv;
        pm["threads"] = o.threads;
        pm["strict"] = o.strict;
        json pt = json::array();
        for (const auto& [k, v] : pot.table()) pt.push_back({k.x, k.y, k.z, v});
        pm["potential"] = pt;
        manifest["parameters"] = std::move(pm);
        manifest["warnings"] = warnings;
        manifest["outputs"] = json::array();
    }

    void write_text(const std::string& name, const std::string& content) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw config_error("cannot write " + (dir / name).string());
        out << content;
        manifest["outputs"].push_back(name);
    }

    void finish() {
        std::ofstream out(dir / "manifest.json", std::ios::binary);
        if (!out) throw config_error("cannot write " + (dir / "manifest.json").string());
        out << manifest.dump(2) << "\n";
    }
};

std::string points_csv(const std::vector<Momentum>& pts) {
    std::string csv = "px,py,pz\n";
    for (Momentum p : pts)
        csv += std::to_string(p.x) + "," + std::to_string(p.y) + "," + std::to_string(p.z) + "\n";
    return csv;
}

// momenta whose per-k artifacts a run should cover: the potential support's
// normal half, or the unit z direction when no potential is given
std::vector<Momentum> report_modes(const PotentialSpec& pot) {
    auto ks = gamma_nor(pot);
    if (ks.empty()) ks.push_back(Momentum{0, 0, 1});
    return ks;
}

void cmd_lattice(const CommonOpts& o, const PotentialSpec& pot, RunContext& rc) {
    auto sys = semiclassical_params(o.kf);
    rc.manifest["results"]["N"] = sys.num_particles;
    rc.manifest["results"]["kappa"] = sys.kappa;
    rc.manifest["results"]["hbar"] = sys.hbar;
    rc.write_text("ball.csv", points_csv(enumerate_fermi_ball(o.kf)));
    json per_k;
    for (Momentum k : report_modes(pot)) {
        ShellSets sh = shell_sets(sys, k);
        rc.write_text("ring_" + mom_tag(k) + ".csv", points_csv(sh.ring));
        json row;
        row["ring_size"] = sh.ring.size();
        row["overlap_count"] = sh.overlap_count;
        row["resolvent_sum"] = resolvent_sum(sys, k);
        per_k[k.str()] = row;
    }
    rc.manifest["results"]["modes"] = per_k;
}

void cmd_patches(const CommonOpts& o, const PotentialSpec& pot, RunContext& rc) {
    auto sys = semiclassical_params(o.kf);
    int m = resolve_patches(o.patches, sys.num_particles, o.delta);
    rc.manifest["parameters"]["patches_resolved"] = m;
    auto pd = build_patch_decomposition(sys, m, o.delta, o.rv);
    for (const auto& w : pd.warnings) rc.manifest["warnings"].push_back(w);

    std::string csv = "alpha,omega_x,omega_y,omega_z,n_members\n";
    for (const Patch& pa : pd.patches)
        csv += std::to_string(pa.id) + "," + fmt17(pa.omega[0]) + "," + fmt17(pa.omega[1]) + "," +
               fmt17(pa.omega[2]) + "," + std::to_string(pa.members.size()) + "\n";
    rc.write_text("patches.csv", csv);
    rc.manifest["results"]["shell_points"] = pd.shell_points;
    rc.manifest["results"]["assigned_points"] = pd.assigned_points;

    json per_k;
    for (Momentum k : report_modes(pot)) {
        auto ms = index_sets(pd, sys, k);
        std::string kcsv = "alpha,side,n_alpha\n";
        for (int i = 0; i < ms.half_dim(); ++i)
            kcsv += std::to_string(ms.plus[size_t(i)]) + ",+," + fmt17(ms.n(i)) + "\n";
        for (int i = 0; i < ms.half_dim(); ++i)
            kcsv += std::to_string(ms.minus[size_t(i)]) + ",-," + fmt17(ms.n(i)) + "\n";
        rc.write_text("counts_" + mom_tag(k) + ".csv", kcsv);

        json row;
        row["dim"] = ms.dim();
        row["dropped"] = ms.dropped.size();
        auto dev = counting_law_check(pd, sys, ms);
        if (!dev.empty()) {
            std::sort(dev.begin(), dev.end());
            row["counting_median_dev"] = dev[dev.size() / 2];
        }
        auto rs = corridor_ribbon_sets(pd, sys, k);
        row["ring_size"] = rs.ring_size;
        row["captured"] = rs.captured;
        row["corridor"] = rs.corridor.size();
        row["ribbon"] = rs.ribbon.size();
        per_k[k.str()] = row;
    }
    rc.manifest["results"]["modes"] = per_k;
}

void cmd_diag(const CommonOpts& o, const PotentialSpec& pot, RunContext& rc) {
    auto sys = semiclassical_params(o.kf);
    int m = resolve_patches(o.patches, sys.num_particles, o.delta);
    rc.manifest["parameters"]["patches_resolved"] = m;
    auto pd = build_patch_decomposition(sys, m, o.delta, o.rv);

    auto ks = report_modes(pot);
    std::vector<std::string> rows(ks.size());
    std::vector<std::string> skipped(ks.size());
    parallel_for(int64_t(ks.size()), o.threads, [&](int64_t i) {
        Momentum k = ks[size_t(i)];
        auto ms = index_sets(pd, sys, k);
        if (ms.dim() == 0) {
            skipped[size_t(i)] = k.str();
            return;
        }
        auto bd = diagonalize_mode(assemble_mode_matrices(sys, pd, ms, pot.value(k)));
        auto ev = sym_eig(bd.E).eval;
        std::string kfield = std::to_string(k.x) + " " + std::to_string(k.y) + " " +
                             std::to_string(k.z);
        rows[size_t(i)] = kfield + "," + std::to_string(bd.dim) + "," +
                          fmt17(bd.ground_constant) + "," + fmt17(ev(0)) + "," +
                          fmt17(ev(ev.size() - 1)) + "," + fmt17(bd.K.norm()) + "," +
                          fmt17(bd.K.cwiseAbs().maxCoeff() * double(m)) + "\n";
    });
    std::string csv = "k,dim,ground_constant,minEigE,maxEigE,normK_HS,maxAbsK_times_M\n";
    json sk = json::array();
    for (size_t i = 0; i < ks.size(); ++i) {
        csv += rows[i];
        if (!skipped[i].empty()) sk.push_back(skipped[i]);
    }
    rc.write_text("modes.csv", csv);
    rc.manifest["results"]["skipped_modes"] = sk;
}

std::string sweep_row_csv(const SweepRow& r) {
    return fmt17(r.kf) + "," + std::to_string(r.num_particles) + "," +
           std::to_string(r.num_patches) + "," + fmt17(r.delta) + "," + fmt17(r.E_trace) + "," +
           fmt17(r.E_integral) + "," + fmt17(r.diff) + "," + fmt17(r.diff_over_hbar) + "," +
           fmt17(r.bound_rhs) + "\n";
}

constexpr const char* sweep_header = "kF,N,M,delta,E_trace,E_integral,diff,diff_over_hbar,bound_rhs\n";

void cmd_energy(const CommonOpts& o, const PotentialSpec& pot, RunContext& rc) {
    auto sys = semiclassical_params(o.kf);
    int m = resolve_patches(o.patches, sys.num_particles, o.delta);
    rc.manifest["parameters"]["patches_resolved"] = m;
    auto pd = build_patch_decomposition(sys, m, o.delta, o.rv);
    auto rep = energy_report(sys, pd, pot, o.delta);

    SweepRow row;
    row.kf = o.kf;
    row.num_particles = sys.num_particles;
    row.num_patches = m;
    row.delta = o.delta;
    row.E_trace = rep.E_trace;
    row.E_integral = rep.E_integral;
    row.diff = rep.diff;
    row.diff_over_hbar = rep.diff / sys.hbar;
    row.bound_rhs = sweep_bound_rhs(sys, m, o.delta);
    rc.write_text("energy.csv", std::string(sweep_header) + sweep_row_csv(row));

    // rows cover the normal half; the integral column carries the factor 2
    // for the +-k pair, so hbar kappa |k| times either column sums to its total
    std::string kcsv = "kx,ky,kz,trace_term,integral_term\n";
    for (const auto& term : rep.per_k)
        kcsv += std::to_string(term.k.x) + "," + std::to_string(term.k.y) + "," +
                std::to_string(term.k.z) + "," + fmt17(term.trace_term) + "," +
                fmt17(2.0 * rpa_k_term(pot.value(term.k))) + "\n";
    rc.write_text("per_mode.csv", kcsv);
    rc.manifest["results"]["E_trace"] = rep.E_trace;
    rc.manifest["results"]["E_integral"] = rep.E_integral;
    rc.manifest["results"]["hartree_fock"] = hartree_fock_energy(sys, pot);
}

void cmd_sweep(const CommonOpts& o, const PotentialSpec& pot, const std::vector<double>& kf_list,
               RunContext& rc) {
    if (kf_list.empty()) throw config_error("sweep requires --kf-list");
    rc.manifest["parameters"]["kf_list"] = kf_list;
    std::vector<SweepRow> rows(kf_list.size());
    parallel_for(int64_t(kf_list.size()), o.threads, [&](int64_t i) {
        auto one = convergence_sweep({kf_list[size_t(i)]}, pot, o.delta, o.rv,
                                     o.patches == "auto"
                                         ? 0
                                         : resolve_patches(o.patches, 0, o.delta));
        rows[size_t(i)] = one.front();
    });
    std::string csv = sweep_header;
    int inversions = 0;
    for (size_t i = 0; i < rows.size(); ++i) {
        csv += sweep_row_csv(rows[i]);
        if (i > 0 && rows[i].diff_over_hbar > rows[i - 1].diff_over_hbar) ++inversions;
    }
    rc.write_text("sweep.csv", csv);
    rc.manifest["results"]["inversions"] = inversions;
    if (rows.size() >= 2 && rows.back().diff > 0.0)
        rc.manifest["results"]["improvement_factor"] = rows.front().diff / rows.back().diff;
}

void cmd_dynamics(const CommonOpts& o, const PotentialSpec& pot, Momentum mode, int level,
                  double t_max, int t_steps, RunContext& rc) {
    if (pot.table().empty())
        throw config_error("dynamics requires a potential (--potential FILE)");
    auto sys = semiclassical_params(o.kf);
    int m = resolve_patches(o.patches, sys.num_particles, o.delta);
    rc.manifest["parameters"]["patches_resolved"] = m;
    rc.manifest["parameters"]["mode"] = {mode.x, mode.y, mode.z};
    rc.manifest["parameters"]["level"] = level;
    rc.manifest["parameters"]["t_max"] = t_max;
    rc.manifest["parameters"]["t_steps"] = t_steps;
    auto pd = build_patch_decomposition(sys, m, o.delta, o.rv);
    auto bds = diagonalize_all(sys, pd, pot);

    auto it = bds.find(mode);
    if (it == bds.end()) throw config_error("no diagonalized mode at k=" + mode.str());
    std::string scsv = "level,energy\n";
    for (int l = 0; l < it->second.curlyK.rows(); ++l)
        scsv += std::to_string(l) + "," + fmt17(stationary_state(bds, sys, mode, l).energy) + "\n";
    rc.write_text("stationary.csv", scsv);

    StationaryState st = stationary_state(bds, sys, mode, level);
    rc.manifest["results"]["energy"] = st.energy;
    rc.manifest["results"]["degenerate"] = st.degenerate;

    if (t_steps < 1) throw config_error("--t-steps must be at least 1");
    std::string ecsv = "t,norm,overlap_re,overlap_im,phase_re,phase_im,energy\n";
    for (int j = 0; j <= t_steps; ++j) {
        double t = t_max * double(j) / double(t_steps);
        auto phit = evolve(st.phi, t, bds);
        auto ov = inner(st.phi, phit);
        auto expect = std::exp(std::complex<double>(0.0, -st.energy * t / sys.hbar));
        ecsv += fmt17(t) + "," + fmt17(phit.norm()) + "," + fmt17(ov.real()) + "," +
                fmt17(ov.imag()) + "," + fmt17(expect.real()) + "," + fmt17(expect.imag()) + "," +
                fmt17(block_energy(phit, bds, sys)) + "\n";
    }
    rc.write_text("evolution.csv", ecsv);
}

void cmd_oracle(const CommonOpts& o, int n_max, RunContext& rc) {
    rc.manifest["parameters"]["n_max"] = n_max;
    std::string csv = "instance,quantity,engine_value,formula_value,abs_diff\n";
    auto row = [&](const std::string& inst, const std::string& qty, double engine,
                   double formula) {
        csv += inst + "," + qty + "," + fmt17(engine) + "," + fmt17(formula) + "," +
               fmt17(std::fabs(engine - formula)) + "\n";
    };

    // synthetic two-patch-pair mode: ED ground and gaps against the
    // Bogoliubov closed forms
    {
        ModeMatrices mm;
        Eigen::VectorXd d(2), v(2);
        d << 0.9, 1.2;
        v << 0.8, 0.6;
        double g = 0.05;
        mm.k = Momentum{0, 0, 1};
        mm.dim = 4;
        mm.vk = 2.0 * g / kappa_const();
        mm.absk = 1.0;
        mm.g = g;
        Eigen::MatrixXd b = g * v * v.transpose();
        mm.D = Eigen::MatrixXd::Zero(4, 4);
        mm.W = Eigen::MatrixXd::Zero(4, 4);
        mm.Wt = Eigen::MatrixXd::Zero(4, 4);
        mm.D.topLeftCorner(2, 2) = d.asDiagonal();
        mm.D.bottomRightCorner(2, 2) = d.asDiagonal();
        mm.W.topLeftCorner(2, 2) = b;
        mm.W.bottomRightCorner(2, 2) = b;
        mm.Wt.topRightCorner(2, 2) = b;
        mm.Wt.bottomLeftCorner(2, 2) = b;
        mm.u = mm.D.diagonal().cwiseSqrt();
        mm.v.resize(4);
        mm.v << v, v;
        auto bd = diagonalize_mode(mm);
        auto res = boson_ed_spectrum(mm.D + mm.W, mm.Wt, n_max, 5);
        row("boson_ed_dim4", "ground_energy", res.ground_energy, bd.ground_constant);
        auto ev = sym_eig(bd.E).eval;
        for (int i = 0; i < 4 && i + 1 < int(res.low_spectrum.size()); ++i)
            row("boson_ed_dim4", "gap_" + std::to_string(i + 1),
                res.low_spectrum[size_t(i + 1)] - res.ground_energy, ev(i));
        rc.manifest["results"]["boson_basis_size"] = res.basis_size;
        rc.manifest["results"]["stable"] = res.stable;
    }

    // pair algebra at a small window: all states below are fixed, no RNG
    {
        auto sys = semiclassical_params(o.kf);
        auto pd = build_patch_decomposition(sys, 2, o.delta, o.rv);
        ModeTable mt = shell_mode_table(sys, 3.0);
        Momentum k{0, 0, 1};
        auto ms = index_sets(pd, sys, k);
        if (ms.half_dim() < 1)
            throw construction_error("oracle probe mode has an empty index set at kF=" +
                                     std::to_string(o.kf));
        auto entries = mode_pair_lists(pd, sys, ms);
        const PairList& north = entries[0];
        const PairList& south = entries[1];

        FockVector vac = FockVector::vacuum();
        FockVector one = pair_operator_apply(mt, north, true, vac);
        row("pair_algebra", "norm_c_dagger_vacuum", dot(one, one).real(), 1.0);

        FockVector two = detail::raw_pair_apply(mt, south, true,
                                                detail::raw_pair_apply(mt, north, true, vac));
        row("pair_algebra", "commutator_max", pair_commutator(mt, north, south, two).max_abs(),
            0.0);
        row("pair_algebra", "ccr_offdiag_max",
            ccr_defect_probe(mt, north, south, two).max_abs(), 0.0);
        row("pair_algebra", "decomposition_max",
            pair_decomposition_check(mt, pd, sys, k, two), 0.0);
        FockVector defect = ccr_defect_probe(mt, north, north, one);
        row("pair_algebra", "defect_over_number", defect.norm() / count_excitations(one).norm(),
            0.0);

        Eigen::VectorXcd e0 = Eigen::VectorXcd::Zero(int(entries.size()));
        e0(0) = 1.0;
        row("pair_algebra", "Z2_m1", fermionic_Zm(mt, entries, {e0}), 1.0);
        double c = double(north.count());
        row("pair_algebra", "Z2_m2_identical", fermionic_Zm(mt, entries, {e0, e0}),
            2.0 * c * (c - 1.0) / (c * c));
        row("pair_algebra", "Z2_boson_identical", bosonic_Zm_reference({e0, e0}), 2.0);
        rc.manifest["results"]["pair_count"] = north.count();
    }

    // brute-force plane-wave energy on the smallest ball
    {
        auto sys1 = semiclassical_params(1.0);
        auto probe = PotentialSpec::from_entries(
            {{Momentum{0, 0, 0}, 0.4}, {Momentum{0, 0, 1}, 0.7}, {Momentum{1, 0, 0}, 0.25}},
            false, nullptr);
        row("planewave_kf1", "energy", planewave_energy_brute(sys1, probe),
            hartree_fock_energy(sys1, probe));
    }

    rc.write_text("oracle.csv", csv);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Collective bosonization pipeline for the mean-field Fermi gas"};
    app.set_version_flag("--version", tool_version);
    app.set_config("--config", "", "Key=value file; command line flags override it");
    app.fallthrough();
    app.require_subcommand(1);
    app.footer("Exit codes: 0 ok, 2 config, 3 construction, 4 numerical singularity, "
               "5 feasibility.");

    CommonOpts o;
    app.add_option("--kf", o.kf, "Fermi momentum");
    app.add_option("--delta", o.delta, "patch exponent delta in (0, 1/6)")
        ->check(CLI::Range(1e-6, 1.0 / 6.0 - 1e-12));
    app.add_option("--patches", o.patches, "patch count M, or 'auto' for round-even N^(4 delta)");
    app.add_option("--rv", o.rv, "shell half-width R_V (corridor scale)");
    app.add_option("--potential", o.potential_file, "potential file: lines 'kx ky kz value'");
    app.add_option("--out", o.out_dir, "output directory");
    app.add_option("--threads", o.threads, "worker pool size for per-mode work")
        ->check(CLI::Range(1, 256));
    app.add_flag("--strict", o.strict, "reject asymmetric potential tables instead of symmetrizing");

    auto* c_lattice = app.add_subcommand("lattice", "dump the Fermi ball and per-mode rings");
    auto* c_patches = app.add_subcommand("patches", "patch decomposition and counting checks");
    auto* c_diag = app.add_subcommand("diag", "per-mode Bogoliubov summary");
    auto* c_energy = app.add_subcommand("energy", "correlation energy, trace vs integral");
    auto* c_sweep = app.add_subcommand("sweep", "trace/integral convergence over a kF list");
    auto* c_dyn = app.add_subcommand("dynamics", "stationary states and phase evolution");
    auto* c_oracle = app.add_subcommand("oracle", "exact small-instance cross-checks");

    std::vector<double> kf_list;
    c_sweep->add_option("--kf-list", kf_list, "comma-separated Fermi momenta")->delimiter(',');

    std::vector<int64_t> mode_raw{0, 0, 1};
    int level = 0;
    double t_max = 1.0;
    int t_steps = 20;
    c_dyn->add_option("--mode", mode_raw, "momentum transfer kx,ky,kz")->delimiter(',');
    c_dyn->add_option("--level", level, "stationary level index");
    c_dyn->add_option("--t-max", t_max, "evolution horizon");
    c_dyn->add_option("--t-steps", t_steps, "number of time steps");

    int n_max = 12;
    c_oracle->add_option("--nmax", n_max, "boson basis total-occupation cutoff")
        ->check(CLI::Range(0, 64));

    try {
        app.parse(argc, argv);

        std::vector<std::string> warnings;
        PotentialSpec pot = load_potential(o.potential_file, o.strict, &warnings);
        for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

        CLI::App* sub = app.get_subcommands().front();
        RunContext rc(sub->get_name(), o, pot, warnings);
        if (sub == c_lattice) {
            cmd_lattice(o, pot, rc);
        } else if (sub == c_patches) {
            cmd_patches(o, pot, rc);
        } else if (sub == c_diag) {
            cmd_diag(o, pot, rc);
        } else if (sub == c_energy) {
            cmd_energy(o, pot, rc);
        } else if (sub == c_sweep) {
            cmd_sweep(o, pot, kf_list, rc);
        } else if (sub == c_dyn) {
            if (mode_raw.size() != 3)
                throw config_error("--mode needs exactly three components kx,ky,kz");
            cmd_dynamics(o, pot, Momentum{mode_raw[0], mode_raw[1], mode_raw[2]}, level, t_max,
                         t_steps, rc);
        } else if (sub == c_oracle) {
            cmd_oracle(o, n_max, rc);
        }
        rc.finish();
        return 0;
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        std::cout << tool_version << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: config: " << one_line(e.what()) << "\n";
        return 2;
    } catch (const fermibos::error& e) {
        std::cerr << "error: " << code_name(e.code()) << ": " << one_line(e.what()) << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << one_line(e.what()) << "\n";
        return 1;
    }
}
