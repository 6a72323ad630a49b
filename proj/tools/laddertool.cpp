#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include "ladder/asymptotics.hpp"
#include "ladder/config.hpp"
#include "ladder/lattice_exact.hpp"
#include "ladder/montecarlo.hpp"
#include "ladder/series.hpp"

namespace fs = std::filesystem;
using namespace ladder;

namespace {

fs::path resolve_out_dir(const std::string& out_dir) {
    const char* root = std::getenv("LADDER_OUT_ROOT");
    fs::path p = root && *root ? fs::path(root) / out_dir : fs::path(out_dir);
    fs::create_directories(p);
    return p;
}

// Tracks artifacts so a failed run leaves no partial outputs behind and a
// successful one lands every file in the manifest.
class ArtifactSink {
  public:
    explicit ArtifactSink(fs::path dir) : dir_(std::move(dir)) {}

    void write(const std::string& name, const std::string& content) {
        fs::path p = dir_ / name;
        std::ofstream os(p, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + p.string());
        os << content;
        os.close();
        written_.push_back(name);
    }

    void discard_all() {
        for (const std::string& name : written_) {
            std::error_code ec;
            fs::remove(dir_ / name, ec);
        }
        written_.clear();
    }

    const std::vector<std::string>& files() const { return written_; }
    const fs::path& dir() const { return dir_; }

  private:
    fs::path dir_;
    std::vector<std::string> written_;
};

struct StageTimer {
    std::vector<std::pair<std::string, double>>& sink;
    std::string name;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    ~StageTimer() {
        sink.emplace_back(name, std::chrono::duration<double>(
                                    std::chrono::steady_clock::now() - t0)
                                    .count());
    }
};

std::string hist_csv(const IntHistogram& h) {
    std::string out = "n,count,p_hat,stderr\n";
    char buf[96];
    for (long n = 1; n < static_cast<long>(h.counts.size()); ++n) {
        std::snprintf(buf, sizeof buf, "%ld,%llu,%.17g,%.17g\n", n,
                      static_cast<unsigned long long>(h.counts[n]), h.p_eq(n), h.stderr_eq(n));
        out += buf;
    }
    std::snprintf(buf, sizeof buf, "-1,%llu,%.17g,0\n",
                  static_cast<unsigned long long>(h.censored),
                  static_cast<double>(h.censored) / static_cast<double>(h.total));
    out += buf;
    return out;
}

std::string geom_hist_csv(const GeomHistogram& h) {
    std::string out = "bin_left,count\n";
    char buf[64];
    for (size_t i = 0; i < h.counts.size(); ++i) {
        if (h.counts[i] == 0) continue;
        std::snprintf(buf, sizeof buf, "%.17g,%llu\n", h.bin_left(i),
                      static_cast<unsigned long long>(h.counts[i]));
        out += buf;
    }
    return out;
}

std::vector<AsymptoticReport> run_verifications(const ExperimentConfig& cfg,
                                                const std::vector<std::string>& ids) {
    IncrementModel model = cfg.model();
    double rho = rho_index(model.alpha(), model.beta());
    std::vector<AsymptoticReport> reports;

    SignSequence signs;
    if (model.is_lattice()) {
        signs = sign_sequence_exact(model, cfg.N);
    } else {
        if (!cfg.seed)
            throw std::invalid_argument("config.seed: mandatory for Monte Carlo sign estimation");
        signs = sign_probabilities_mc(model, cfg.N, cfg.trials, SeedPlan{*cfg.seed, cfg.streams});
    }
    LadderPmf tau_minus = tau_minus_pmf(signs, cfg.N);
    LadderPmf tau_plus = tau_plus_pmf(signs, cfg.N);

    for (const std::string& id : ids) {
        AsymptoticReport rep;
        if (id == "main") {
            rep = verify_local_law_minus(tau_minus, rho, cfg.n_grid);
        } else if (id == "main-prime") {
            rep = verify_local_law_plus(tau_plus, rho, cfg.n_grid);
        } else if (id == "omega-ratio") {
            PowerSeries omega = omega_series(signs, cfg.N);
            OmegaTotal total = omega_total(omega);
            PowerSeries t_minus = t_minus_pmf(tau_minus, omega);
            rep = verify_omega_ratio(t_minus, tau_minus.pmf, total, cfg.n_grid);
        } else if (id == "small-dev") {
            rep = verify_small_deviations(model, std::max<long>(cfg.N / 2, 64));
        } else if (id == "renewal") {
            RenewalTable rt = renewal_function(model, std::max<long>(cfg.x_max, 400), 4096);
            rep = verify_renewal_asymptotics(rt, model);
        } else if (id == "spitzer") {
            rep = spitzer_doney_diagnostic(signs, rho, cfg.n_grid);
        } else {
            throw std::invalid_argument("unknown theorem id '" + id + "'");
        }
        rep.model = model.describe();
        reports.push_back(std::move(rep));
    }
    return reports;
}

int run_config(ExperimentConfig cfg) {
    cfg.validate();
    IncrementModel model = cfg.model();
    fs::path out = resolve_out_dir(cfg.out_dir);
    ArtifactSink sink(out);
    RunManifest manifest;
    manifest.config_hash_hex = hex64(config_hash(cfg));
    manifest.seed = cfg.seed.value_or(0);
    manifest.streams = cfg.streams;
    if (cfg.seed) manifest.seed_plan_hash = SeedPlan{*cfg.seed, cfg.streams}.hash(cfg.trials);

    bool all_pass = true;
    try {
        if (cfg.task == "exact") {
            StageTimer t{manifest.stage_seconds, "exact"};
            KilledWalkOptions opts;
            opts.j_max = cfg.j_max;
            long width = opts.j_max > 0 ? opts.j_max : cfg.N * model.k_max();
            opts.keep_rows = static_cast<size_t>(cfg.N + 1) * width <= (size_t(1) << 22);
            KilledWalkTable kt = killed_walk(model, cfg.N, opts);
            PowerSeries pmf;
            pmf.coeffs = kt.pmf;
            sink.write("exact_tau_minus.csv", series_to_csv(pmf));
            PowerSeries surv;
            surv.coeffs = kt.survival;
            sink.write("exact_survival.csv", series_to_csv(surv));
            if (opts.keep_rows) sink.write("killed_rows.csv", killed_table_to_csv(kt));
            killed_table_save(kt, model.hash(), (out / "killed.cache").string());
            nlohmann::json j;
            j["leaked_mass"] = kt.leaked_mass;
            j["flagged"] = kt.flagged;
            j["N"] = kt.N;
            j["j_max"] = kt.j_max;
            sink.write("exact_summary.json", j.dump(2));
        } else if (cfg.task == "series") {
            StageTimer t{manifest.stage_seconds, "series"};
            SignSequence signs;
            if (model.is_lattice()) {
                signs = sign_sequence_exact(model, cfg.N);
            } else {
                if (!cfg.seed)
                    throw std::invalid_argument("config.seed: mandatory for continuous models");
                signs = sign_probabilities_mc(model, cfg.N, cfg.trials,
                                              SeedPlan{*cfg.seed, cfg.streams});
            }
            LadderPmf tm = tau_minus_pmf(signs, cfg.N);
            LadderPmf tp = tau_plus_pmf(signs, cfg.N);
            PowerSeries omega = omega_series(signs, cfg.N);
            PowerSeries t_minus = t_minus_pmf(tm, omega);
            sink.write("tau_minus.csv", series_to_csv(tm.pmf));
            sink.write("tau_plus.csv", series_to_csv(tp.pmf));
            sink.write("omega.csv", series_to_csv(omega));
            sink.write("t_minus.csv", series_to_csv(t_minus));
            nlohmann::json j;
            j["factorization_residual"] = factorization_residual(tp.pmf, tm.pmf);
            j["N"] = cfg.N;
            sink.write("series_summary.json", j.dump(2));
        } else if (cfg.task == "mc") {
            StageTimer t{manifest.stage_seconds, "mc"};
            SeedPlan plan{*cfg.seed, cfg.streams};
            LadderSimResult sim = simulate_ladders(model, cfg.N, cfg.trials, plan);
            sink.write("mc_tau_minus.csv", hist_csv(sim.tau_minus));
            sink.write("mc_tau_plus.csv", hist_csv(sim.tau_plus));
            sink.write("mc_chi_plus.csv", geom_hist_csv(sim.chi_plus));
            nlohmann::json j;
            j["estimate"] = sim.chi_acc.mean();
            j["stderr"] = sim.chi_acc.std_error();
            j["n"] = cfg.N;
            j["trials"] = cfg.trials;
            j["seed_plan_hash"] = hex64(plan.hash(cfg.trials));
            j["censored_tau_minus"] = sim.tau_minus.censored;
            j["censored_tau_plus"] = sim.tau_plus.censored;
            sink.write("mc_summary.json", j.dump(2));
        } else { // verify-all or verify:<id>
            StageTimer t{manifest.stage_seconds, "verify"};
            std::vector<std::string> ids;
            if (cfg.task == "verify-all") {
                if (model.is_lattice())
                    ids = {"main", "main-prime", "omega-ratio", "small-dev", "renewal", "spitzer"};
                else
                    ids = {"main", "main-prime", "omega-ratio", "spitzer"};
            } else {
                ids = {cfg.task.substr(7)};
            }
            std::vector<AsymptoticReport> reports = run_verifications(cfg, ids);
            for (size_t i = 0; i < reports.size(); ++i) {
                sink.write(ids[i] + "_report.json", reports[i].to_json());
                sink.write(ids[i] + "_plot.csv", report_plot_csv(reports[i]));
                std::cout << reports[i].to_table();
                all_pass = all_pass && reports[i].pass;
            }
        }
    } catch (...) {
        sink.discard_all();
        throw;
    }

    for (const std::string& name : sink.files())
        manifest.artifact_digests[name] = hex64(digest_file((out / name).string()));
    {
        std::ofstream os(out / "manifest.json", std::ios::binary);
        os << manifest.to_json();
    }
    std::cout << "wrote " << sink.files().size() << " artifact(s) to " << out.string() << "\n";
    return all_pass ? 0 : 3;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ladder-epoch fluctuation toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_override, task_override, theorem = "all", manifest_path;
    int workers = 0;
    uint64_t seed_override = 0;
    bool seed_given = false;
    uint64_t trials_override = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "experiment config (JSON)")->required();
        sub->add_option("--out", out_override, "override output directory");
        sub->add_option("--workers", workers, "OpenMP thread count (0 = default)");
        sub->add_option("--seed", seed_override, "override RNG seed")
            ->each([&](const std::string&) { seed_given = true; });
        sub->add_option("--trials", trials_override, "override trial count");
    };

    CLI::App* run = app.add_subcommand("run", "run the task named in the config");
    add_common(run);
    run->add_option("--task", task_override, "override config task");

    CLI::App* verify = app.add_subcommand("verify", "run theorem verifications");
    add_common(verify);
    verify->add_option("--theorem", theorem,
                       "main|main-prime|omega-ratio|small-dev|renewal|spitzer|all");

    CLI::App* list = app.add_subcommand("list-models", "print built-in model configs");
    CLI::App* show = app.add_subcommand("show-manifest", "pretty-print a run manifest");
    show->add_option("--path", manifest_path, "manifest.json or its directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (list->parsed()) {
            std::cout << "lazy walk:        "
                      << R"({"kind":"finite_lattice","pmf":[0.25,0.5,0.25],"k_min":-1,"span":1.0})"
                      << "\n";
            std::cout << "simple +-1 walk:  "
                      << R"({"kind":"finite_lattice","pmf":[0.5,0.0,0.5],"k_min":-1,"span":1.0})"
                      << "\n";
            std::cout << "lattice pareto:   "
                      << R"({"kind":"lattice_pareto","alpha":0.5,"p":0.5,"q":0.5,"k_tail":1000000,"span":1.0})"
                      << "\n";
            std::cout << "two-sided pareto: "
                      << R"({"kind":"two_sided_pareto","alpha":1.5,"p":0.5,"q":0.5,"centered":true})"
                      << "\n";
            return 0;
        }
        if (show->parsed()) {
            fs::path p(manifest_path);
            if (fs::is_directory(p)) p /= "manifest.json";
            std::ifstream is(p);
            if (!is) throw std::runtime_error("cannot open " + p.string());
            std::ostringstream ss;
            ss << is.rdbuf();
            std::cout << nlohmann::json::parse(ss.str()).dump(2) << "\n";
            return 0;
        }

        std::ifstream is(config_path);
        if (!is) throw std::runtime_error("cannot open config " + config_path);
        std::ostringstream ss;
        ss << is.rdbuf();
        ExperimentConfig cfg = config_from_json(ss.str());
        if (!out_override.empty()) cfg.out_dir = out_override;
        if (seed_given) cfg.seed = seed_override;
        if (trials_override > 0) cfg.trials = trials_override;
        if (run->parsed() && !task_override.empty()) cfg.task = task_override;
        if (verify->parsed()) cfg.task = theorem == "all" ? "verify-all" : "verify:" + theorem;
        if (workers > 0) omp_set_num_threads(workers);
        return run_config(std::move(cfg));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
