#include "bgnn/serialize.hpp"

#include <set>

#include "bgnn/error.hpp"

namespace bgnn {

nlohmann::ordered_json config_to_json(const ModelConfig& cfg) {
  nlohmann::ordered_json j;
  j["variant"] = std::string(to_string(cfg.variant));
  j["layers"] = cfg.layers;
  j["hidden_dim"] = cfg.hidden_dim;
  j["alpha"] = cfg.alpha;
  j["beta"] = cfg.beta;
  j["dropout"] = cfg.dropout;
  j["weight_decay"] = cfg.weight_decay;
  j["learning_rate"] = cfg.learning_rate;
  j["max_epochs"] = cfg.max_epochs;
  j["patience"] = cfg.patience;
  j["seed"] = cfg.seed;
  j["share_weights"] = cfg.share_weights;
  j["hop_mode"] = cfg.hop_mode == HopMode::ExactWalk ? "exact" : "within";
  j["attention_slope"] = cfg.attention_slope;
  return j;
}

ModelConfig config_from_json(const nlohmann::json& j) {
  static const std::set<std::string> known = {
      "variant", "layers",   "hidden_dim", "alpha",         "beta",     "dropout",
      "weight_decay", "learning_rate", "max_epochs", "patience", "seed", "share_weights",
      "hop_mode", "attention_slope"};
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  ModelConfig cfg;
  try {
    if (j.contains("variant")) cfg.variant = parse_variant(j["variant"].get<std::string>());
    if (j.contains("layers")) cfg.layers = j["layers"].get<std::size_t>();
    if (j.contains("hidden_dim")) cfg.hidden_dim = j["hidden_dim"].get<std::size_t>();
    if (j.contains("alpha")) cfg.alpha = j["alpha"].get<double>();
    if (j.contains("beta")) cfg.beta = j["beta"].get<std::vector<double>>();
    if (j.contains("dropout")) cfg.dropout = j["dropout"].get<double>();
    if (j.contains("weight_decay")) cfg.weight_decay = j["weight_decay"].get<double>();
    if (j.contains("learning_rate")) cfg.learning_rate = j["learning_rate"].get<double>();
    if (j.contains("max_epochs")) cfg.max_epochs = j["max_epochs"].get<std::size_t>();
    if (j.contains("patience")) cfg.patience = j["patience"].get<std::size_t>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("share_weights")) cfg.share_weights = j["share_weights"].get<bool>();
    if (j.contains("hop_mode")) {
      const auto mode = j["hop_mode"].get<std::string>();
      if (mode == "exact") {
        cfg.hop_mode = HopMode::ExactWalk;
      } else if (mode == "within") {
        cfg.hop_mode = HopMode::WithinK;
      } else {
        throw ConfigError("hop_mode must be 'exact' or 'within'");
      }
    }
    if (j.contains("attention_slope")) cfg.attention_slope = j["attention_slope"].get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

}  // namespace bgnn
