#include "config.hpp"

#include "dreid/io.hpp"

namespace dreid::cli {

namespace {

void merge_known(json& base, const json& update, const std::string& prefix) {
  if (!update.is_object()) throw UsageError("config" + (prefix.empty() ? "" : " '" + prefix + "'") +
                                            " must be a JSON object");
  for (const auto& [key, value] : update.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!base.contains(key)) throw UsageError("unknown config key '" + path + "'");
    if (base[key].is_object()) {
      merge_known(base[key], value, path);
    } else {
      base[key] = value;
    }
  }
}

template <class T>
T number(const json& config, const char* key) {
  const json& v = config.at(json::json_pointer(key));
  if (!v.is_number()) throw UsageError(std::string("config ") + key + " must be a number");
  return v.get<T>();
}

void require_one_of(const json& config, const char* key, std::initializer_list<const char*> allowed) {
  const json& v = config.at(json::json_pointer(key));
  if (v.is_string()) {
    for (const char* a : allowed) {
      if (v.get<std::string>() == a) return;
    }
  }
  std::string msg = std::string("config ") + key + " must be one of:";
  for (const char* a : allowed) msg += std::string(" ") + a;
  throw UsageError(msg);
}

}  // namespace

json default_config() {
  return json{
      {"manifest", ""},
      {"descriptor", "ed+skl"},
      {"fusion_scaling", "raw"},
      {"protocol", "single_shot"},
      {"trials", 10},
      {"seed", 0},
      {"gallery_group", 0},
      {"probe_group", 0},
      {"train_fraction", 0.5},
      {"max_rank", 0},
      {"threads", 0},
      {"grid", {{"rows", 6}, {"cols", 2}}},
      {"k", 10},
      {"eps_rel", 1e-6},
      {"output", "dreid-out"},
      {"descriptors", ""},
      {"transfer",
       {{"aux_manifest", ""},
        {"target_manifest", ""},
        {"model", ""},
        {"beta", 10.0},
        {"gamma1", 10.0},
        {"gamma1p", 10.0},
        {"gamma0", 1.0},
        {"gamma0p", 1.0},
        {"m", 700},
        {"gamma_v", 0.0},
        {"gamma_d", 0.0},
        {"eta", 0.3},
        {"etas", {0.0, 0.15, 0.3, 1.0}},
        {"rgb_mean", 0.0}}},
      {"synth",
       {{"kind", "bodies"},
        {"persons", 3},
        {"frames", 4},
        {"max_yaw_deg", 30.0},
        {"noise", 2.0},
        {"views", 8},
        {"target_persons", 20},
        {"corrupt_fraction", 0.2}}},
      {"verify", {{"pairs", 1000}, {"motions", 200}}},
  };
}

json load_config(const std::filesystem::path& path) {
  json cfg = default_config();
  json file;
  try {
    file = json::parse(io::read_text(path));
  } catch (const json::exception& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
  merge_known(cfg, file, "");
  return cfg;
}

void apply_override(json& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw UsageError("override '" + std::string(assignment) + "' is not of the form key=value");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  json* node = &config;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object() || !node->contains(part)) throw UsageError("unknown config key '" + key + "'");
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (node->is_object()) throw UsageError("config key '" + key + "' is a section, not a value");
  // Keep string-typed keys strings even when the text looks like a number.
  if (node->is_string() && !value.is_string()) value = raw;
  *node = std::move(value);
}

void validate_config(const json& c) {
  try {
    require_one_of(c, "/descriptor", {"dvcov", "ed", "skl", "ed+skl", "dvcov+skl"});
    require_one_of(c, "/protocol", {"single_shot", "multi_shot"});
    require_one_of(c, "/fusion_scaling", {"raw", "mean"});
    require_one_of(c, "/synth/kind", {"bodies", "paired", "corruption"});
    if (number<int>(c, "/trials") < 1) throw UsageError("config /trials must be at least 1");
    if (number<long long>(c, "/seed") < 0) throw UsageError("config /seed must be non-negative");
    const double tf = number<double>(c, "/train_fraction");
    if (!(tf >= 0.0 && tf < 1.0)) throw UsageError("config /train_fraction must lie in [0, 1)");
    if (number<int>(c, "/threads") < 0) throw UsageError("config /threads must be non-negative");
    if (number<int>(c, "/max_rank") < 0) throw UsageError("config /max_rank must be non-negative");
    if (number<int>(c, "/grid/rows") < 1 || number<int>(c, "/grid/cols") < 1) {
      throw UsageError("config /grid needs rows, cols >= 1");
    }
    if (number<int>(c, "/k") < 2) throw UsageError("config /k must be at least 2");
    if (!(number<double>(c, "/eps_rel") >= 0.0)) throw UsageError("config /eps_rel must be non-negative");
    const double eta = number<double>(c, "/transfer/eta");
    if (!(eta >= 0.0 && eta <= 1.0)) throw UsageError("config /transfer/eta must lie in [0, 1]");
    const json& etas = c.at("transfer").at("etas");
    if (!etas.is_array() || etas.empty()) throw UsageError("config /transfer/etas must be a non-empty array");
    for (const auto& e : etas) {
      if (!e.is_number() || e.get<double>() < 0.0 || e.get<double>() > 1.0) {
        throw UsageError("config /transfer/etas entries must lie in [0, 1]");
      }
    }
    if (number<int>(c, "/transfer/m") < 1) throw UsageError("config /transfer/m must be at least 1");
    if (number<int>(c, "/synth/persons") < 2) throw UsageError("config /synth/persons must be at least 2");
    if (number<int>(c, "/synth/frames") < 1) throw UsageError("config /synth/frames must be at least 1");
    if (number<int>(c, "/verify/pairs") < 1 || number<int>(c, "/verify/motions") < 1) {
      throw UsageError("config /verify counts must be positive");
    }
    if (!c.at("output").is_string() || c.at("output").get<std::string>().empty()) {
      throw UsageError("config /output must name a directory");
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
}

std::filesystem::path resolve(const std::filesystem::path& base_file, const std::string& path) {
  const std::filesystem::path p(path);
  if (p.is_absolute()) return p;
  return base_file.parent_path() / p;
}

}  // namespace dreid::cli
