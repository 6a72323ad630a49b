#include "ladder/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace ladder {

using nlohmann::json;

std::string model_to_json(const IncrementModel& model) {
    json j;
    switch (model.kind()) {
        case ModelKind::FiniteLattice:
            j["kind"] = "finite_lattice";
            j["pmf"] = model.lattice_pmf();
            j["k_min"] = model.k_min();
            j["span"] = model.span();
            break;
        case ModelKind::LatticePareto:
            j["kind"] = "lattice_pareto";
            j["alpha"] = model.alpha();
            j["p"] = model.p();
            j["q"] = model.q();
            j["k_tail"] = model.k_max();
            j["span"] = model.span();
            break;
        case ModelKind::TwoSidedPareto:
            j["kind"] = "two_sided_pareto";
            j["alpha"] = model.alpha();
            j["p"] = model.p();
            j["q"] = model.q();
            j["centered"] = model.shift() != 0.0 || model.alpha() < 1.0;
            break;
    }
    return j.dump();
}

namespace {

IncrementModel model_from_json(const json& j) {
    if (!j.contains("kind")) throw std::invalid_argument("model: missing field 'kind'");
    std::string kind = j.at("kind").get<std::string>();
    auto need = [&](const char* field) {
        if (!j.contains(field))
            throw std::invalid_argument("model(" + kind + "): missing field '" + field + "'");
    };
    if (kind == "finite_lattice") {
        need("pmf");
        need("k_min");
        std::vector<double> pmf = j.at("pmf").get<std::vector<double>>();
        long k_min = j.at("k_min").get<long>();
        double span = j.value("span", 1.0);
        return IncrementModel::finite_lattice(pmf, k_min, span);
    }
    if (kind == "lattice_pareto") {
        need("alpha");
        need("p");
        need("q");
        return IncrementModel::lattice_pareto(j.at("alpha").get<double>(),
                                              j.at("p").get<double>(), j.at("q").get<double>(),
                                              j.value("k_tail", 1000000L), j.value("span", 1.0));
    }
    if (kind == "two_sided_pareto") {
        need("alpha");
        need("p");
        need("q");
        return IncrementModel::two_sided_pareto(j.at("alpha").get<double>(),
                                                j.at("p").get<double>(), j.at("q").get<double>(),
                                                j.value("centered", true));
    }
    throw std::invalid_argument("model: unknown kind '" + kind + "'");
}

} // namespace

IncrementModel model_from_json_text(const std::string& text) {
    return model_from_json(json::parse(text));
}

void ExperimentConfig::validate() const {
    if (model_json.empty()) throw std::invalid_argument("config.model: required");
    model(); // throws with a model-specific message
    bool known = task == "exact" || task == "series" || task == "mc" || task == "verify-all" ||
                 task.rfind("verify:", 0) == 0;
    if (!known)
        throw std::invalid_argument("config.task: expected exact|series|mc|verify-all|verify:<id>,"
                                    " got '" + task + "'");
    if (N < 1) throw std::invalid_argument("config.N: must be >= 1");
    if (task == "mc" && !seed)
        throw std::invalid_argument("config.seed: mandatory for mc tasks");
    if (streams < 1) throw std::invalid_argument("config.streams: must be >= 1");
    if (n_grid.empty()) throw std::invalid_argument("config.n_grid: must be nonempty");
    for (long n : n_grid)
        if (n < 1) throw std::invalid_argument("config.n_grid: entries must be >= 1");
    if (x_max < 1) throw std::invalid_argument("config.x_max: must be >= 1");
    if (out_dir.empty()) throw std::invalid_argument("config.out_dir: must be nonempty");
}

std::string config_to_json(const ExperimentConfig& c) {
    json j;
    j["model"] = json::parse(c.model_json);
    j["task"] = c.task;
    j["N"] = c.N;
    j["n_grid"] = c.n_grid;
    j["trials"] = c.trials;
    if (c.seed) j["seed"] = *c.seed;
    j["streams"] = c.streams;
    j["j_max"] = c.j_max;
    j["x_max"] = c.x_max;
    j["out_dir"] = c.out_dir;
    return j.dump(2);
}

ExperimentConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
    }
    ExperimentConfig c;
    if (j.contains("model")) c.model_json = j.at("model").dump();
    if (j.contains("task")) c.task = j.at("task").get<std::string>();
    if (j.contains("N")) c.N = j.at("N").get<long>();
    if (j.contains("n_grid")) c.n_grid = j.at("n_grid").get<std::vector<long>>();
    if (j.contains("trials")) c.trials = j.at("trials").get<uint64_t>();
    if (j.contains("seed")) c.seed = j.at("seed").get<uint64_t>();
    if (j.contains("streams")) c.streams = j.at("streams").get<uint32_t>();
    if (j.contains("j_max")) c.j_max = j.at("j_max").get<long>();
    if (j.contains("x_max")) c.x_max = j.at("x_max").get<long>();
    if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
    c.validate();
    return c;
}

uint64_t config_hash(const ExperimentConfig& c) {
    // Canonical form: compact dump with sorted keys (nlohmann objects sort).
    json j = json::parse(config_to_json(c));
    std::string s = j.dump();
    return fnv1a(s.data(), s.size());
}

std::string RunManifest::to_json() const {
    json j;
    j["config_hash"] = config_hash_hex;
    j["tool_version"] = tool_version;
    j["seed"] = seed;
    j["streams"] = streams;
    j["seed_plan_hash"] = hex64(seed_plan_hash);
    json stages = json::array();
    for (const auto& [name, secs] : stage_seconds) stages.push_back({{"stage", name}, {"seconds", secs}});
    j["stages"] = stages;
    j["artifacts"] = artifact_digests;
    return j.dump(2);
}

std::string hex64(uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

uint64_t digest_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("digest_file: cannot open " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    std::string s = ss.str();
    return fnv1a(s.data(), s.size());
}

} // namespace ladder
