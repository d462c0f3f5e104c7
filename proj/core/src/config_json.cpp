#include "config_json.hpp"

#include "posegen/errors.hpp"

namespace posegen::detail {

using nlohmann::json;

json vae_config_to_json(const vae::VaeConfig& c) {
    return json{{"data_dim", c.data_dim},
                {"seq_len", c.seq_len},
                {"latent_tokens", c.latent_tokens},
                {"latent_dim", c.latent_dim},
                {"width", c.width},
                {"blocks", c.blocks},
                {"heads", c.heads},
                {"huber_delta", c.huber_delta},
                {"kl_weight", c.kl_weight},
                {"lr", c.lr},
                {"batch_size", c.batch_size},
                {"steps", c.steps},
                {"checkpoint_interval", c.checkpoint_interval},
                {"seed", c.seed}};
}

vae::VaeConfig vae_config_from_json(const json& j) {
    vae::VaeConfig c;
    c.data_dim = j.at("data_dim").get<int>();
    c.seq_len = j.at("seq_len").get<int>();
    c.latent_tokens = j.at("latent_tokens").get<int>();
    c.latent_dim = j.at("latent_dim").get<int>();
    c.width = j.at("width").get<int>();
    c.blocks = j.at("blocks").get<int>();
    c.heads = j.at("heads").get<int>();
    c.huber_delta = j.at("huber_delta").get<double>();
    c.kl_weight = j.at("kl_weight").get<double>();
    c.lr = j.at("lr").get<double>();
    c.batch_size = j.at("batch_size").get<int>();
    c.steps = j.at("steps").get<long>();
    c.checkpoint_interval = j.at("checkpoint_interval").get<long>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

json denoiser_config_to_json(const pld::DenoiserConfig& c) {
    return json{{"latent_tokens", c.latent_tokens},
                {"latent_dim", c.latent_dim},
                {"d_model", c.d_model},
                {"layers", c.layers},
                {"heads", c.heads},
                {"time_embed_dim", c.time_embed_dim},
                {"text_dim", c.text_dim},
                {"audio_dim", c.audio_dim},
                {"audio_tokens", c.audio_tokens},
                {"p_uncond", c.p_uncond},
                {"seed", c.seed}};
}

pld::DenoiserConfig denoiser_config_from_json(const json& j) {
    pld::DenoiserConfig c;
    c.latent_tokens = j.at("latent_tokens").get<int>();
    c.latent_dim = j.at("latent_dim").get<int>();
    c.d_model = j.at("d_model").get<int>();
    c.layers = j.at("layers").get<int>();
    c.heads = j.at("heads").get<int>();
    c.time_embed_dim = j.at("time_embed_dim").get<int>();
    c.text_dim = j.at("text_dim").get<int>();
    c.audio_dim = j.at("audio_dim").get<int>();
    c.audio_tokens = j.at("audio_tokens").get<int>();
    c.p_uncond = j.at("p_uncond").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

json norm_stats_to_json(const NormStats& s) {
    json mean = json::array(), sd = json::array(), degen = json::array();
    for (int i = 0; i < s.dim(); ++i) {
        mean.push_back(s.mean[i]);
        sd.push_back(s.stddev[i]);
        degen.push_back(static_cast<bool>(s.degenerate[i]));
    }
    return json{{"mean", mean}, {"stddev", sd}, {"degenerate", degen}};
}

NormStats norm_stats_from_json(const json& j) {
    NormStats s;
    const auto& mean = j.at("mean");
    const auto& sd = j.at("stddev");
    const auto& degen = j.at("degenerate");
    if (mean.size() != sd.size() || mean.size() != degen.size())
        throw ValidationError("norm stats: inconsistent array lengths");
    const int d = static_cast<int>(mean.size());
    s.mean.resize(d);
    s.stddev.resize(d);
    s.degenerate.resize(d);
    for (int i = 0; i < d; ++i) {
        s.mean[i] = mean[i].get<double>();
        s.stddev[i] = sd[i].get<double>();
        s.degenerate[i] = degen[i].get<bool>();
    }
    return s;
}

} // namespace posegen::detail
