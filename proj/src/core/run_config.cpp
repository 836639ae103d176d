#include "kdg/run_config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace kdg {

using nlohmann::json;

PhantomSpec DataConfig::phantom(Domain d) const {
    PhantomSpec s;
    s.domain = d;
    s.size = size;
    s.min_ellipses = min_ellipses;
    s.max_ellipses = max_ellipses;
    s.texture_noise_floor = texture_noise_floor;
    s.native_fraction = native_fraction;
    return s;
}

void RunConfig::validate() const {
    auto fail = [](const std::string& m) { throw ConfigError(m); };
    if (out.empty()) fail("out must not be empty");
    if (data.size < 16) fail("data.size must be >= 16");
    if (data.n_source < 0) fail("data.n_source must be >= 0");
    if (data.n_target < 0) fail("data.n_target must be >= 0");
    if (data.min_ellipses < 0) fail("data.min_ellipses must be >= 0");
    if (data.max_ellipses < data.min_ellipses) fail("data.max_ellipses must be >= data.min_ellipses");
    if (data.texture_noise_floor < 0) fail("data.texture_noise_floor must be >= 0");
    if (!(data.native_fraction > 0 && data.native_fraction <= 1)) fail("data.native_fraction must be in (0,1]");
    if (noise_reference_size < 0) fail("noise_reference_size must be >= 0");
    if (eval.max_samples < 0) fail("eval.max_samples must be >= 0");
    for (const auto& d : eval.domains) {
        try {
            parse_domain(d);
        } catch (const Error&) {
            fail("eval.domains: unknown domain '" + d + "'");
        }
    }
    try {
        parse_domain(export_.domain);
    } catch (const Error&) {
        fail("export.domain: unknown domain '" + export_.domain + "'");
    }
    if (export_.count < 0) fail("export.count must be >= 0");
    try {
        train.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const ArgumentError& e) {
        fail(e.what());
    }
    if (train.seed != seed) fail("train.seed must equal seed");
}

NoiseConfig RunConfig::effective_noise() const {
    if (noise_reference_size > 0) return train.noise.scaled_to_grid(data.size, noise_reference_size);
    return train.noise;
}

std::string RunConfig::source_path() const {
    return data.source_path.empty() ? (std::filesystem::path(out) / "source.kdgd").string() : data.source_path;
}

std::string RunConfig::target_path() const {
    return data.target_path.empty() ? (std::filesystem::path(out) / "target.kdgd").string() : data.target_path;
}

namespace {

json noise_json(const NoiseConfig& n) {
    return {{"kind", noise_kind_name(n.kind)},
            {"tau_cartesian", n.tau_cartesian},
            {"tau_radial", n.tau_radial},
            {"epsilon_adv", n.epsilon_adv},
            {"num_bits", n.num_bits},
            {"sigma_image", n.sigma_image},
            {"eps_max", n.eps_max},
            {"t_warmup", n.t_warmup},
            {"apply_prob", n.apply_prob},
            {"measurement_sigma", n.measurement_sigma}};
}

json to_json_value(const RunConfig& c) {
    const TrainConfig& t = c.train;
    json j;
    j["seed"] = c.seed;
    j["out"] = c.out;
    j["noise_reference_size"] = c.noise_reference_size;
    j["data"] = {{"size", c.data.size},
                 {"n_source", c.data.n_source},
                 {"n_target", c.data.n_target},
                 {"min_ellipses", c.data.min_ellipses},
                 {"max_ellipses", c.data.max_ellipses},
                 {"texture_noise_floor", c.data.texture_noise_floor},
                 {"native_fraction", c.data.native_fraction},
                 {"source_path", c.data.source_path},
                 {"target_path", c.data.target_path}};
    j["train"] = {{"epochs", t.epochs},
                  {"batch_size", t.batch_size},
                  {"lr_recon_max", t.lr_recon_max},
                  {"lr_traj_cartesian", t.lr_traj_cartesian},
                  {"lr_traj_radial", t.lr_traj_radial},
                  {"trajectory_learning", t.trajectory_learning},
                  {"sampling", sampling_name(t.sampling)},
                  {"acceleration", t.acceleration},
                  {"center_fraction", t.center_fraction},
                  {"radial_shots", t.radial_shots},
                  {"initial_gap", t.initial_gap},
                  {"lr_warmup", t.lr_warmup},
                  {"weight_decay", t.weight_decay},
                  {"val_fraction", t.val_fraction},
                  {"model", {{"depth", t.model.depth}, {"base_channels", t.model.base_channels}}},
                  {"noise", noise_json(t.noise)}};
    j["eval"] = {{"runs", c.eval.runs}, {"domains", c.eval.domains}, {"max_samples", c.eval.max_samples}};
    j["export"] = {{"runs", c.export_.runs},
                   {"domain", c.export_.domain},
                   {"sample_ids", c.export_.sample_ids},
                   {"count", c.export_.count}};
    return j;
}

// Reads fields out of one JSON object, rejecting keys it was never asked about.
class Fields {
public:
    Fields(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
        if (!j_.is_object()) throw ConfigError(name("") + " must be an object");
    }

    template <class T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        const auto it = j_.find(key);
        if (it == j_.end()) return;
        try {
            if constexpr (std::is_same_v<T, int>) {
                if (!it->is_number_integer()) throw ConfigError(name(key) + " must be an integer");
            } else if constexpr (std::is_same_v<T, std::uint64_t>) {
                if (!it->is_number_unsigned() && !(it->is_number_integer() && it->template get<long long>() >= 0))
                    throw ConfigError(name(key) + " must be a non-negative integer");
            } else if constexpr (std::is_same_v<T, double>) {
                if (!it->is_number()) throw ConfigError(name(key) + " must be a number");
            } else if constexpr (std::is_same_v<T, bool>) {
                if (!it->is_boolean()) throw ConfigError(name(key) + " must be a boolean");
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!it->is_string()) throw ConfigError(name(key) + " must be a string");
            }
            out = it->template get<T>();
        } catch (const json::exception&) {
            throw ConfigError(name(key) + " has the wrong type");
        }
    }

    template <class F>
    void with(const char* key, F&& fn) {
        seen_.insert(key);
        const auto it = j_.find(key);
        if (it == j_.end()) return;
        try {
            fn(*it, name(key));
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw ConfigError(name(key) + ": " + e.what());
        } catch (const json::exception&) {
            throw ConfigError(name(key) + " has the wrong type");
        }
    }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) throw ConfigError("unknown field '" + name(k) + "'");
    }

    std::string name(const std::string& key) const {
        if (prefix_.empty()) return key.empty() ? "config" : key;
        return key.empty() ? prefix_ : prefix_ + "." + key;
    }

private:
    const json& j_;
    std::string prefix_;
    std::set<std::string> seen_;
};

void read_noise(const json& j, const std::string& prefix, NoiseConfig& n) {
    Fields f(j, prefix);
    f.with("kind", [&](const json& v, const std::string&) { n.kind = parse_noise_kind(v.get<std::string>()); });
    f.get("tau_cartesian", n.tau_cartesian);
    f.get("tau_radial", n.tau_radial);
    f.get("epsilon_adv", n.epsilon_adv);
    f.get("num_bits", n.num_bits);
    f.get("sigma_image", n.sigma_image);
    f.get("eps_max", n.eps_max);
    f.get("t_warmup", n.t_warmup);
    f.get("apply_prob", n.apply_prob);
    f.get("measurement_sigma", n.measurement_sigma);
    f.finish();
}

void read_strings(const json& v, const std::string& field, std::vector<std::string>& out) {
    if (!v.is_array()) throw ConfigError(field + " must be an array of strings");
    out.clear();
    for (const auto& e : v) {
        if (!e.is_string()) throw ConfigError(field + " must be an array of strings");
        out.push_back(e.get<std::string>());
    }
}

}  // namespace

std::string to_json(const RunConfig& c, int indent) { return to_json_value(c).dump(indent) + "\n"; }

RunConfig run_config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig c;
    Fields top(j, "");
    top.get("seed", c.seed);
    top.get("out", c.out);
    top.get("noise_reference_size", c.noise_reference_size);
    top.with("data", [&](const json& v, const std::string& p) {
        Fields f(v, p);
        f.get("size", c.data.size);
        f.get("n_source", c.data.n_source);
        f.get("n_target", c.data.n_target);
        f.get("min_ellipses", c.data.min_ellipses);
        f.get("max_ellipses", c.data.max_ellipses);
        f.get("texture_noise_floor", c.data.texture_noise_floor);
        f.get("native_fraction", c.data.native_fraction);
        f.get("source_path", c.data.source_path);
        f.get("target_path", c.data.target_path);
        f.finish();
    });
    top.with("train", [&](const json& v, const std::string& p) {
        TrainConfig& t = c.train;
        Fields f(v, p);
        f.get("epochs", t.epochs);
        f.get("batch_size", t.batch_size);
        f.get("lr_recon_max", t.lr_recon_max);
        f.get("lr_traj_cartesian", t.lr_traj_cartesian);
        f.get("lr_traj_radial", t.lr_traj_radial);
        f.get("trajectory_learning", t.trajectory_learning);
        f.with("sampling", [&](const json& s, const std::string&) { t.sampling = parse_sampling(s.get<std::string>()); });
        f.get("acceleration", t.acceleration);
        f.get("center_fraction", t.center_fraction);
        f.get("radial_shots", t.radial_shots);
        f.get("initial_gap", t.initial_gap);
        f.get("lr_warmup", t.lr_warmup);
        f.get("weight_decay", t.weight_decay);
        f.get("val_fraction", t.val_fraction);
        f.with("model", [&](const json& m, const std::string& mp) {
            Fields g(m, mp);
            g.get("depth", t.model.depth);
            g.get("base_channels", t.model.base_channels);
            g.finish();
        });
        f.with("noise", [&](const json& n, const std::string& np) { read_noise(n, np, t.noise); });
        f.finish();
    });
    top.with("eval", [&](const json& v, const std::string& p) {
        Fields f(v, p);
        f.with("runs", [&](const json& a, const std::string& n) { read_strings(a, n, c.eval.runs); });
        f.with("domains", [&](const json& a, const std::string& n) { read_strings(a, n, c.eval.domains); });
        f.get("max_samples", c.eval.max_samples);
        f.finish();
    });
    top.with("export", [&](const json& v, const std::string& p) {
        Fields f(v, p);
        f.with("runs", [&](const json& a, const std::string& n) { read_strings(a, n, c.export_.runs); });
        f.get("domain", c.export_.domain);
        f.with("sample_ids", [&](const json& a, const std::string& n) {
            if (!a.is_array()) throw ConfigError(n + " must be an array of integers");
            c.export_.sample_ids.clear();
            for (const auto& e : a) {
                if (!e.is_number_unsigned()) throw ConfigError(n + " must be an array of non-negative integers");
                c.export_.sample_ids.push_back(e.get<std::uint32_t>());
            }
        });
        f.get("count", c.export_.count);
        f.finish();
    });
    top.finish();
    c.train.seed = c.seed;
    c.validate();
    return c;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return run_config_from_json(ss.str());
}

}  // namespace kdg
