#include "posegen/checkpoint.hpp"

#include <fstream>

#include "config_json.hpp"
#include "posegen/errors.hpp"
#include "posegen/tensor_io.hpp"

namespace posegen {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string blob_name(const char* prefix, size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s_%04zu.f64", prefix, i);
    return buf;
}

json save_store(const fs::path& dir, const nn::ParamStore& store) {
    json params = json::array();
    size_t i = 0;
    for (const auto& p : store) {
        const std::string file = blob_name("param", i);
        save_tensor_f64(p.value, dir / file);
        params.push_back({{"name", p.name},
                          {"shape", {p.value.rows(), p.value.cols()}},
                          {"file", file}});
        ++i;
    }
    return params;
}

void load_store(const fs::path& dir, const json& params, nn::ParamStore& store) {
    if (params.size() != store.count())
        throw ValidationError(dir.string() + ": checkpoint has " +
                              std::to_string(params.size()) + " params, model expects " +
                              std::to_string(store.count()));
    for (const auto& entry : params) {
        const std::string name = entry.at("name").get<std::string>();
        nn::Param& p = store.at(name);
        const MatD value = load_tensor_f64(dir / entry.at("file").get<std::string>());
        if (value.rows() != p.value.rows() || value.cols() != p.value.cols())
            throw ValidationError(dir.string() + ": shape mismatch for parameter " + name);
        p.value = value;
    }
}

json save_optimizer(const fs::path& dir, const nn::AdamOptimizer& opt) {
    json adam;
    const auto& m = opt.moments_m();
    const auto& v = opt.moments_v();
    for (size_t i = 0; i < m.size(); ++i) {
        save_tensor_f64(m[i], dir / blob_name("adam_m", i));
        save_tensor_f64(v[i], dir / blob_name("adam_v", i));
    }
    const auto& cfg = opt.config();
    adam["count"] = m.size();
    adam["t"] = opt.step_count();
    adam["lr"] = cfg.lr;
    adam["beta1"] = cfg.beta1;
    adam["beta2"] = cfg.beta2;
    adam["eps"] = cfg.eps;
    return adam;
}

std::unique_ptr<nn::AdamOptimizer> load_optimizer(const fs::path& dir, const json& adam,
                                                  nn::ParamStore& store) {
    nn::AdamOptimizer::Config cfg;
    cfg.lr = adam.at("lr").get<double>();
    cfg.beta1 = adam.at("beta1").get<double>();
    cfg.beta2 = adam.at("beta2").get<double>();
    cfg.eps = adam.at("eps").get<double>();
    auto opt = std::make_unique<nn::AdamOptimizer>(store, cfg);
    const size_t count = adam.at("count").get<size_t>();
    if (count != opt->moments_m().size())
        throw ValidationError(dir.string() + ": optimizer moment count mismatch");
    for (size_t i = 0; i < count; ++i) {
        opt->moments_m()[i] = load_tensor_f64(dir / blob_name("adam_m", i));
        opt->moments_v()[i] = load_tensor_f64(dir / blob_name("adam_v", i));
    }
    opt->set_step_count(adam.at("t").get<long>());
    return opt;
}

void write_manifest(const fs::path& dir, const json& manifest) {
    std::ofstream out(dir / "manifest.json");
    if (!out) throw IoError("cannot write checkpoint manifest in " + dir.string());
    out << manifest.dump(2) << "\n";
    if (!out) throw IoError("checkpoint manifest write failed in " + dir.string());
}

json read_manifest(const fs::path& dir, const char* expected_kind) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw IoError("missing checkpoint manifest: " + (dir / "manifest.json").string());
    json manifest;
    try {
        in >> manifest;
    } catch (const json::exception& e) {
        throw ValidationError(dir.string() + ": bad checkpoint manifest: " + e.what());
    }
    if (manifest.value("kind", "") != expected_kind)
        throw ValidationError(dir.string() + ": checkpoint kind is '" +
                              manifest.value("kind", "") + "', expected '" + expected_kind +
                              "'");
    return manifest;
}

json meta_to_json(const TrainMeta& meta) {
    return json{{"step", meta.step},
                {"rng_seed", meta.rng_seed},
                {"rng_counter", meta.rng_counter}};
}

TrainMeta meta_from_json(const json& j) {
    TrainMeta meta;
    meta.step = j.at("step").get<long>();
    meta.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    meta.rng_counter = j.at("rng_counter").get<std::uint64_t>();
    return meta;
}

} // namespace

void save_vae_checkpoint(const fs::path& dir, const vae::SequenceVae& model,
                         const nn::AdamOptimizer* opt, const NormStats& stats,
                         const TrainMeta& meta) {
    fs::create_directories(dir);
    json manifest;
    manifest["kind"] = "vae";
    manifest["config"] = detail::vae_config_to_json(model.config());
    manifest["norm_stats"] = detail::norm_stats_to_json(stats);
    manifest["train"] = meta_to_json(meta);
    manifest["params"] = save_store(dir, model.params());
    if (opt) manifest["adam"] = save_optimizer(dir, *opt);
    write_manifest(dir, manifest);
}

LoadedVae load_vae_checkpoint(const fs::path& dir, bool with_optimizer) {
    const json manifest = read_manifest(dir, "vae");
    LoadedVae out;
    out.model = std::make_unique<vae::SequenceVae>(
        detail::vae_config_from_json(manifest.at("config")));
    load_store(dir, manifest.at("params"), out.model->params());
    out.stats = detail::norm_stats_from_json(manifest.at("norm_stats"));
    out.meta = meta_from_json(manifest.at("train"));
    if (with_optimizer) {
        if (!manifest.contains("adam"))
            throw ValidationError(dir.string() + ": checkpoint has no optimizer state");
        out.opt = load_optimizer(dir, manifest.at("adam"), out.model->params());
    }
    return out;
}

void save_pld_checkpoint(const fs::path& dir, const pld::Denoiser& model,
                         const nn::AdamOptimizer* opt, const PldExtra& extra,
                         const TrainMeta& meta) {
    fs::create_directories(dir);
    json manifest;
    manifest["kind"] = "pld";
    manifest["config"] = detail::denoiser_config_to_json(model.config());
    manifest["latent_scale"] = extra.latent_scale;
    manifest["schedule"] = {
        {"t_diff", extra.t_diff}, {"beta_min", extra.beta_min}, {"beta_max", extra.beta_max}};
    manifest["train"] = meta_to_json(meta);
    manifest["params"] = save_store(dir, model.params());
    if (opt) manifest["adam"] = save_optimizer(dir, *opt);
    write_manifest(dir, manifest);
}

LoadedPld load_pld_checkpoint(const fs::path& dir, bool with_optimizer) {
    const json manifest = read_manifest(dir, "pld");
    LoadedPld out;
    out.model = std::make_unique<pld::Denoiser>(
        detail::denoiser_config_from_json(manifest.at("config")));
    load_store(dir, manifest.at("params"), out.model->params());
    out.extra.latent_scale = manifest.at("latent_scale").get<double>();
    out.extra.t_diff = manifest.at("schedule").at("t_diff").get<int>();
    out.extra.beta_min = manifest.at("schedule").at("beta_min").get<double>();
    out.extra.beta_max = manifest.at("schedule").at("beta_max").get<double>();
    out.meta = meta_from_json(manifest.at("train"));
    if (with_optimizer) {
        if (!manifest.contains("adam"))
            throw ValidationError(dir.string() + ": checkpoint has no optimizer state");
        out.opt = load_optimizer(dir, manifest.at("adam"), out.model->params());
    }
    return out;
}

} // namespace posegen
