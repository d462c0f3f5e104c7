#pragma once

// Internal JSON conversions shared by checkpoint and CLI config code.

#include <json.hpp>

#include "posegen/diffusion.hpp"
#include "posegen/types.hpp"
#include "posegen/vae.hpp"

namespace posegen::detail {

nlohmann::json vae_config_to_json(const vae::VaeConfig& c);
vae::VaeConfig vae_config_from_json(const nlohmann::json& j);

nlohmann::json denoiser_config_to_json(const pld::DenoiserConfig& c);
pld::DenoiserConfig denoiser_config_from_json(const nlohmann::json& j);

nlohmann::json norm_stats_to_json(const NormStats& s);
NormStats norm_stats_from_json(const nlohmann::json& j);

} // namespace posegen::detail
