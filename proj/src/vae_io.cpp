#include <fstream>
#include <json.hpp>

#include "motiontk/errors.hpp"
#include "motiontk/vae.hpp"

namespace mtk {

using nlohmann::ordered_json;

namespace {
constexpr int kFormatVersion = 1;
}

void save_vae(const VaeModel& model, const std::string& path) {
  const VaeConfig& c = model.config();
  ordered_json doc;
  doc["format"] = "mtk-vae";
  doc["version"] = kFormatVersion;
  doc["config"] = {{"input_dim", c.input_dim},
                   {"latent_dim", c.latent_dim},
                   {"hidden_dim", c.hidden_dim},
                   {"num_experts", c.num_experts},
                   {"gate_hidden", c.gate_hidden},
                   {"beta", c.beta},
                   {"logsig_min", c.logsig_min},
                   {"logsig_max", c.logsig_max}};
  doc["trained"] = model.trained();
  doc["param_count"] = model.param_count();
  auto params = ordered_json::array();
  for (const Param* p : model.params().all()) {
    ordered_json pj;
    pj["name"] = p->name;
    pj["shape"] = {p->value.rows, p->value.cols};
    pj["data"] = p->value.v;
    params.push_back(std::move(pj));
  }
  doc["params"] = std::move(params);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("model: cannot write '" + path + "'");
  out << doc.dump() << "\n";
}

VaeModel load_vae(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("model: cannot open '" + path + "'");
  ordered_json doc;
  try {
    doc = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("model '" + path + "': " + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != "mtk-vae") {
      throw ParseError("model '" + path + "': not a model file");
    }
    if (doc.at("version").get<int>() != kFormatVersion) {
      throw ParseError("model '" + path + "': unsupported version " +
                       std::to_string(doc.at("version").get<int>()));
    }
    const auto& cj = doc.at("config");
    VaeConfig cfg;
    cfg.input_dim = cj.at("input_dim").get<int>();
    cfg.latent_dim = cj.at("latent_dim").get<int>();
    cfg.hidden_dim = cj.at("hidden_dim").get<int>();
    cfg.num_experts = cj.at("num_experts").get<int>();
    cfg.gate_hidden = cj.at("gate_hidden").get<int>();
    cfg.beta = cj.at("beta").get<double>();
    cfg.logsig_min = cj.at("logsig_min").get<double>();
    cfg.logsig_max = cj.at("logsig_max").get<double>();

    VaeModel model(cfg, /*seed=*/0);
    std::size_t filled = 0;
    for (const auto& pj : doc.at("params")) {
      const std::string name = pj.at("name").get<std::string>();
      if (!model.params().contains(name)) {
        throw ParseError("model '" + path + "': unknown parameter '" + name + "'");
      }
      Param& p = model.params().at(name);
      const auto& shape = pj.at("shape");
      if (shape.size() != 2 || shape[0].get<int>() != p.value.rows ||
          shape[1].get<int>() != p.value.cols) {
        throw ParseError("model '" + path + "': shape mismatch for '" + name + "'");
      }
      const auto& data = pj.at("data");
      if (data.size() != p.value.size()) {
        throw ParseError("model '" + path + "': data size mismatch for '" + name + "'");
      }
      for (std::size_t i = 0; i < p.value.size(); ++i) {
        p.value.v[i] = data[i].get<double>();
      }
      ++filled;
    }
    if (filled != model.params().all().size()) {
      throw ParseError("model '" + path + "': missing parameters");
    }
    if (doc.at("param_count").get<std::size_t>() != model.param_count()) {
      throw ParseError("model '" + path + "': param_count mismatch");
    }
    model.set_trained(doc.at("trained").get<bool>());
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("model '" + path + "': " + e.what());
  }
}

}  // namespace mtk
