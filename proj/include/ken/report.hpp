#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "ken/errors.hpp"
#include "ken/novelty.hpp"

namespace ken {

// Key order is part of the format; ordered_json preserves insertion order
// and nlohmann serializes doubles with shortest round-trip precision.
inline nlohmann::ordered_json report_to_json(const NoveltyReport& report) {
  using json = nlohmann::ordered_json;
  json j;
  j["eta"] = report.eta;
  j["sigma"] = report.sigma;
  j["n"] = std::int64_t(report.n);
  j["m"] = std::int64_t(report.m);
  j["eigenvalues_positive"] = report.eigenvalues_positive;
  j["sum_positive"] = report.sum_positive;
  j["ken"] = report.ken;
  if (report.rken)
    j["rken"] = *report.rken;
  else
    j["rken"] = nullptr;

  json modes = json::array();
  for (const ModeSummary& mode : report.modes) {
    json entry;
    entry["rank"] = mode.rank;
    entry["eigenvalue"] = mode.eigenvalue;
    auto members = [](const std::vector<ModeEntry>& list) {
      json arr = json::array();
      for (const ModeEntry& e : list)
        arr.push_back({{"index", std::int64_t(e.index)}, {"score", e.score}});
      return arr;
    };
    entry["top_test"] = members(mode.top_test);
    entry["top_ref"] = members(mode.top_ref);
    modes.push_back(std::move(entry));
  }
  j["modes"] = std::move(modes);

  json config;
  config["cutoff_abs"] = report.config.cutoff_abs;
  config["cutoff_rel"] = report.config.cutoff_rel;
  config["jitter"] = report.config.jitter;
  if (report.config.seed)
    config["seed"] = *report.config.seed;
  else
    config["seed"] = nullptr;
  config["factorization"] = report.config.factorization;
  if (report.config.rng.empty())
    config["rng"] = nullptr;
  else
    config["rng"] = report.config.rng;
  if (report.config.sigma_selection) {
    const SigmaSelection& sel = *report.config.sigma_selection;
    json s;
    s["satisfied"] = sel.satisfied;
    s["candidates"] = sel.candidates;
    s["variances"] = sel.variances;
    config["sigma_selection"] = std::move(s);
  } else {
    config["sigma_selection"] = nullptr;
  }
  config["warnings"] = report.config.warnings;
  j["config"] = std::move(config);
  return j;
}

inline std::string report_to_string(const NoveltyReport& report) {
  return report_to_json(report).dump(2) + "\n";
}

inline void write_report(const std::string& path,
                         const NoveltyReport& report) {
  const std::string text = report_to_string(report);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open '" + path + "' for writing");
  f.write(text.data(), std::streamsize(text.size()));
  if (!f) throw io_error("write failure on '" + path + "'");
}

}  // namespace ken
