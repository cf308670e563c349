#include "unison/commands.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "unison/analysis.hpp"
#include "unison/error.hpp"
#include "unison/pitch.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace unison {

namespace {

std::string resolve_path(const fs::path& base, const std::string& p) {
  fs::path path(p);
  if (path.is_absolute()) return path.string();
  return (base / path).string();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_failure, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::io_failure, "write failed: " + path.string());
}

json metrics_json(const MetricsReport& m) {
  return json{{"rpa", m.rpa},
              {"oa", m.oa},
              {"vr", m.vr},
              {"vfa", m.vfa},
              {"tolerance_cents", m.tolerance_cents}};
}

// Annotation CSVs or tracked stems, all moved to the shared hop and cut to
// the shortest contour so the group sits on one grid.
UnisonGroup build_group(const SectionEntry& entry, const CommandOptions& opts) {
  UnisonGroup group;
  group.section = parse_section(entry.section);

  bool annotated = !entry.annotations.empty();
  for (std::size_t i = 0; i < entry.stems.size(); ++i) {
    F0Contour c;
    if (annotated) {
      c = load_contour_csv(entry.annotations[i]);
    } else {
      TrackerConfig cfg;
      cfg.hop_seconds = opts.hop_seconds;
      c = track_f0(load_wav(entry.stems[i]), cfg);
    }
    group.contours.push_back(resample_contour(c, opts.hop_seconds));
  }

  std::size_t min_frames = SIZE_MAX;
  for (const F0Contour& c : group.contours)
    min_frames = std::min(min_frames, c.size());
  for (F0Contour& c : group.contours) c.values_hz.resize(min_frames);
  return group;
}

std::string entry_name(const SectionEntry& entry) {
  return entry.name.empty() ? entry.section : entry.name;
}

} // namespace

Manifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_failure, "cannot open manifest " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::bad_format,
                "manifest " + path + ": " + std::string(e.what()));
  }
  if (!doc.is_object() || !doc.contains("sections") || !doc["sections"].is_array())
    throw Error(ErrorCode::bad_format,
                "manifest " + path + ": expected top-level {\"sections\": [...]}");

  fs::path base = fs::path(path).parent_path();
  Manifest manifest;
  for (const json& s : doc["sections"]) {
    SectionEntry entry;
    entry.section = s.value("section", "");
    entry.name = s.value("name", "");
    parse_section(entry.section); // validate early
    if (!s.contains("stems") || !s["stems"].is_array() || s["stems"].empty())
      throw Error(ErrorCode::bad_format,
                  "manifest entry '" + entry.section + "': needs >= 1 stem");
    for (const json& p : s["stems"])
      entry.stems.push_back(resolve_path(base, p.get<std::string>()));
    if (s.contains("annotations") && !s["annotations"].is_null()) {
      for (const json& p : s["annotations"])
        entry.annotations.push_back(resolve_path(base, p.get<std::string>()));
      if (entry.annotations.size() != entry.stems.size())
        throw Error(ErrorCode::bad_format,
                    "manifest entry '" + entry.section +
                        "': annotation count must match stem count");
    }
    manifest.sections.push_back(std::move(entry));
  }
  return manifest;
}

int cmd_analyze(const Manifest& manifest, const std::string& out_dir,
                const CommandOptions& opts) {
  fs::create_directories(out_dir);
  int status = 0;
  for (const SectionEntry& entry : manifest.sections) {
    std::string name = entry_name(entry);
    try {
      UnisonGroup group = build_group(entry, opts);
      json report;
      report["section"] = entry.section;
      report["singers"] = group.singers();
      report["hop_seconds"] = opts.hop_seconds;

      if (group.singers() < 2) {
        report["note"] = "n<2: skipped";
        report["delta_f0_cents"] = nullptr;
        report["transitions"] = json{{"mean_s", nullptr},
                                     {"std_s", nullptr},
                                     {"count", 0}};
      } else {
        DeviationStats dev = inter_singer_deviation(group);
        TransitionStats trans = transition_regions(group);
        report["delta_f0_cents"] = json{{"mean", dev.mean_cents},
                                        {"std", dev.std_cents},
                                        {"frames", dev.per_frame_deviations.size()}};
        report["transitions"] = json{{"mean_s", trans.mean_seconds},
                                     {"std_s", trans.std_seconds},
                                     {"count", trans.count()}};

        std::string csv = "time_seconds,deviation_cents\n";
        for (std::size_t i = 0; i < dev.per_frame_deviations.size(); ++i) {
          char line[64];
          std::snprintf(line, sizeof line, "%.6f,%.6f\n",
                        double(dev.frame_indices[i]) * opts.hop_seconds,
                        dev.per_frame_deviations[i]);
          csv += line;
        }
        write_text(fs::path(out_dir) / ("deviations_" + name + ".csv"), csv);
      }
      write_text(fs::path(out_dir) / ("analysis_" + name + ".json"),
                 report.dump(2) + "\n");
    } catch (const std::exception& e) {
      std::cerr << "analyze: " << name << ": " << e.what() << "\n";
      status = 1;
    }
  }
  return status;
}

int cmd_compare(const Manifest& manifest, const std::string& out_dir,
                const CommandOptions& opts) {
  fs::create_directories(out_dir);
  int status = 0;
  for (const SectionEntry& entry : manifest.sections) {
    std::string name = entry_name(entry);
    try {
      if (entry.annotations.empty())
        throw Error(ErrorCode::invalid_argument,
                    "compare needs annotations for every stem");
      UnisonGroup group = build_group(entry, opts);

      std::vector<AudioClip> stems;
      for (const std::string& p : entry.stems) stems.push_back(load_wav(p));
      AudioClip mix = mix_and_normalize(stems);

      TrackerConfig cfg;
      cfg.hop_seconds = opts.hop_seconds;
      UnisonCompareReport rep =
          compare_unison_f0(group, mix, cfg, opts.tolerance_cents);

      json report;
      report["section"] = entry.section;
      report["vs_mean"] = metrics_json(rep.vs_mean);
      report["vs_individual"] = json::array();
      for (const MetricsReport& m : rep.vs_individual)
        report["vs_individual"].push_back(metrics_json(m));
      write_text(fs::path(out_dir) / ("compare_" + name + ".json"),
                 report.dump(2) + "\n");

      std::string csv = "target,rpa,oa,vr,vfa\n";
      auto add_row = [&csv](const std::string& target, const MetricsReport& m) {
        char line[160];
        std::snprintf(line, sizeof line, "%s,%.6f,%.6f,%.6f,%.6f\n",
                      target.c_str(), m.rpa, m.oa, m.vr, m.vfa);
        csv += line;
      };
      add_row("mean", rep.vs_mean);
      for (std::size_t i = 0; i < rep.vs_individual.size(); ++i)
        add_row("singer_" + std::to_string(i + 1), rep.vs_individual[i]);
      write_text(fs::path(out_dir) / ("compare_" + name + ".csv"), csv);
    } catch (const std::exception& e) {
      std::cerr << "compare: " << name << ": " << e.what() << "\n";
      status = 1;
    }
  }
  return status;
}

int cmd_stu(const std::string& in_wav, const CloneParams& params,
            const std::string& out_wav) {
  try {
    AudioClip in = load_wav(in_wav);
    AudioClip out = solo_to_unison(in, params);
    save_wav(out, out_wav);

    json sidecar;
    sidecar["command"] = "stu";
    sidecar["input"] = in_wav;
    sidecar["output"] = out_wav;
    sidecar["std_cents"] = params.std_cents;
    sidecar["ts_seconds"] = params.ts_seconds;
    sidecar["ns"] = params.ns;
    sidecar["timbre_variation"] = params.timbre_variation;
    sidecar["timbre_warp_scale"] = params.timbre_warp_scale;
    sidecar["seed"] = params.seed;
    sidecar["sample_rate"] = out.sample_rate;
    write_text(out_wav + ".json", sidecar.dump(2) + "\n");
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "stu: " << e.what() << "\n";
    return 1;
  }
}

int cmd_uts(const std::string& in_wav, const std::string& out_wav,
            const CommandOptions& opts) {
  try {
    AudioClip in = load_wav(in_wav);

    TrackerConfig cfg;
    cfg.hop_seconds = opts.hop_seconds;
    F0Contour tracked;
    AudioClip out = unison_to_solo(in, cfg, &tracked);

    save_wav(out, out_wav);
    save_contour_csv(tracked, out_wav + ".f0.csv");
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "uts: " << e.what() << "\n";
    return 1;
  }
}

CloneParams stu_preset(const std::string& name) {
  std::string key;
  for (char c : name) key += char(std::tolower(static_cast<unsigned char>(c)));

  CloneParams p;
  p.ns = 4;
  if (key == "stu_ps") {
    p.std_cents = 50.0;
    p.ts_seconds = 0.0;
    p.timbre_variation = true;
  } else if (key == "stu_pts") {
    p.std_cents = 50.0;
    p.ts_seconds = 0.040;
    p.timbre_variation = true;
  } else if (key == "stu_ts") {
    p.std_cents = 0.0;
    p.ts_seconds = 0.040;
    p.timbre_variation = true;
  } else if (key == "stu_pt") {
    p.std_cents = 50.0;
    p.ts_seconds = 0.040;
    p.timbre_variation = false;
  } else {
    throw Error(ErrorCode::invalid_argument, "unknown preset: " + name);
  }
  return p;
}

std::string default_out_dir() {
  const char* env = std::getenv("UNISON_OUT_DIR");
  return env && *env ? env : ".";
}

} // namespace unison
