#pragma once

#include "fbpghi/core.hpp"
#include "fbpghi/scales.hpp"

#include <json.hpp>

#include <initializer_list>
#include <string>
#include <string_view>

namespace fbpghi::detail {

using Json = nlohmann::ordered_json;

/// Throws DataError naming the first key of `object` not in `allowed`.
inline void reject_unknown_keys(const Json& object, std::initializer_list<std::string_view> allowed,
                                std::string_view where) {
  if (!object.is_object()) throw DataError(std::string(where) + ": expected a JSON object");
  for (const auto& item : object.items()) {
    bool known = false;
    for (std::string_view key : allowed) known = known || item.key() == key;
    if (!known) throw DataError(std::string(where) + ": unknown key \"" + item.key() + "\"");
  }
}

inline Json to_json(const FilterBankSpec& spec) {
  return Json{{"scale", std::string(to_string(spec.scale.kind))},
              {"bins", spec.bins},
              {"bw", spec.bw},
              {"fmin", spec.fmin},
              {"fmax", spec.fmax},
              {"decimation", spec.decimation},
              {"sample_rate", spec.sample_rate},
              {"edge_channels", spec.edge_channels}};
}

/// Missing keys keep the values already in `base`.
inline FilterBankSpec filterbank_from_json(const Json& j, FilterBankSpec base, std::string_view where) {
  reject_unknown_keys(j, {"name", "preset", "scale", "bins", "bw", "fmin", "fmax", "decimation",
                          "sample_rate", "edge_channels"},
                      where);
  try {
    if (j.contains("scale")) {
      const auto kind = parse_scale_kind(j.at("scale").get<std::string>());
      if (!kind) throw DataError(std::string(where) + ": unknown scale " + j.at("scale").dump());
      base.scale.kind = *kind;
    }
    if (j.contains("bins")) base.bins = j.at("bins").get<double>();
    if (j.contains("bw")) base.bw = j.at("bw").get<double>();
    if (j.contains("fmin")) base.fmin = j.at("fmin").get<double>();
    if (j.contains("fmax")) base.fmax = j.at("fmax").get<double>();
    if (j.contains("decimation")) base.decimation = j.at("decimation").get<Index>();
    if (j.contains("sample_rate")) base.sample_rate = j.at("sample_rate").get<double>();
    if (j.contains("edge_channels")) base.edge_channels = j.at("edge_channels").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string(where) + ": " + e.what());
  }
  return base;
}

}  // namespace fbpghi::detail
