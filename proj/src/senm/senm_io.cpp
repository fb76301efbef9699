#include "readout/senm_io.hpp"

#include <fstream>
#include <sstream>

#include "readout/errors.hpp"

namespace readout::senm {

using nlohmann::json;

namespace {

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ParseError(where + ": missing field '" + key + "'");
  }
  return obj.at(key);
}

template <typename T>
T read_as(const json& value, const std::string& where) {
  try {
    return value.get<T>();
  } catch (const json::exception& e) {
    throw ParseError(where + ": " + e.what());
  }
}

std::size_t read_order(const json& value, const std::string& where) {
  if (value.is_string()) {
    if (value.get<std::string>() == "full") return TransitionKernel::kFullHistory;
    throw ParseError(where + ": order must be a positive integer or \"full\"");
  }
  const auto order = read_as<std::size_t>(value, where);
  if (order == 0) throw ParseError(where + ": order must be a positive integer or \"full\"");
  return order;
}

// Re-throws config errors raised while building objects with the JSON
// location attached.
template <typename F>
auto at_location(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const ParseError&) {
    throw;
  } catch (const ConfigError& e) {
    throw ParseError(where + ": " + e.what());
  }
}

}  // namespace

SenmModel model_from_json(const json& doc) {
  if (!doc.is_object()) throw ParseError("model: expected a JSON object");
  if (doc.contains("schema_version")) {
    const auto v = read_as<int>(doc.at("schema_version"), "schema_version");
    if (v != kSpecSchemaVersion) {
      throw ParseError("schema_version " + std::to_string(v) + " is not supported");
    }
  }
  const auto steps = read_as<std::size_t>(require(doc, "steps", "model"), "steps");
  if (steps == 0) throw ParseError("steps: must be at least 1");

  const json& ens = require(doc, "ensemble", "model");
  std::size_t num_symbols = 0;
  if (ens.contains("symbols")) {
    num_symbols = read_as<std::vector<std::string>>(ens.at("symbols"), "ensemble.symbols").size();
  } else {
    num_symbols = read_as<std::size_t>(require(ens, "num_symbols", "ensemble"), "ensemble.num_symbols");
  }
  const auto initial = read_as<std::vector<double>>(require(ens, "initial_dist", "ensemble"),
                                                    "ensemble.initial_dist");

  std::optional<EnsembleSpec> spec;
  if (ens.contains("collections")) {
    auto readouts = read_as<std::vector<std::vector<double>>>(ens.at("collections"),
                                                              "ensemble.collections");
    spec = at_location("ensemble", [&] {
      return EnsembleSpec::labelled(num_symbols, std::move(readouts), initial);
    });
  } else {
    const auto copies = read_as<std::size_t>(require(ens, "num_copies", "ensemble"), "ensemble.num_copies");
    const auto states = read_as<std::size_t>(require(ens, "num_states", "ensemble"), "ensemble.num_states");
    auto map = read_as<std::vector<std::size_t>>(require(ens, "readout_map", "ensemble"),
                                                 "ensemble.readout_map");
    spec = at_location("ensemble", [&] {
      return EnsembleSpec::enumerated(copies, states, num_symbols, std::move(map), initial);
    });
  }

  const json& ker = require(doc, "kernel", "model");
  const std::size_t order = read_order(require(ker, "order", "kernel"), "kernel.order");
  const bool step_dependent =
      ker.contains("step_dependent") ? read_as<bool>(ker.at("step_dependent"), "kernel.step_dependent")
                                     : false;
  TransitionKernel kernel(order, step_dependent);
  const json& tables = require(ker, "tables", "kernel");
  if (!tables.is_array()) throw ParseError("kernel.tables: expected an array");
  for (std::size_t i = 0; i < tables.size(); ++i) {
    const std::string where = "kernel.tables[" + std::to_string(i) + "]";
    const json& t = tables[i];
    auto history = read_as<std::vector<std::size_t>>(require(t, "history", where), where + ".history");
    auto next = read_as<std::vector<double>>(require(t, "next", where), where + ".next");
    if (next.size() != spec->num_collections()) {
      throw ParseError(where + ".next: expected " + std::to_string(spec->num_collections()) +
                       " entries, got " + std::to_string(next.size()));
    }
    for (std::size_t s : history) {
      if (s >= spec->num_collections()) throw ParseError(where + ".history: collection out of range");
    }
    std::optional<std::size_t> step;
    if (t.contains("step")) step = read_as<std::size_t>(t.at("step"), where + ".step");
    at_location(where, [&] {
      kernel.set(std::move(history), std::move(next), step);
      return 0;
    });
  }
  return SenmModel{std::move(*spec), std::move(kernel), steps};
}

json model_to_json(const SenmModel& model) {
  json ens;
  ens["num_symbols"] = model.spec.num_symbols();
  ens["initial_dist"] = model.spec.initial_dist();
  if (model.spec.is_enumerated()) {
    ens["num_copies"] = model.spec.num_copies();
    ens["num_states"] = model.spec.num_states();
    ens["readout_map"] = model.spec.readout_map();
  } else {
    json cols = json::array();
    for (std::size_t c = 0; c < model.spec.num_collections(); ++c) cols.push_back(model.spec.readout(c));
    ens["collections"] = cols;
  }
  json ker;
  if (model.kernel.full_history()) {
    ker["order"] = "full";
  } else {
    ker["order"] = model.kernel.order();
  }
  ker["step_dependent"] = model.kernel.step_dependent();
  json tables = json::array();
  for (const auto& e : model.kernel.entries()) {
    json t;
    if (e.step) t["step"] = *e.step;
    t["history"] = e.history;
    t["next"] = e.next;
    tables.push_back(std::move(t));
  }
  ker["tables"] = tables;
  return json{{"schema_version", kSpecSchemaVersion},
              {"steps", model.steps},
              {"ensemble", ens},
              {"kernel", ker}};
}

SenmModel parse_model(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  return model_from_json(doc);
}

SenmModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open spec file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_model(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace readout::senm
