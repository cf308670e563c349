#pragma once

#include <string>
#include <vector>

#include "unison/synth.hpp"

namespace unison {

// One section's worth of material. Stem paths are WAV files; annotations,
// when given, are F0 CSVs aligned 1:1 with the stems. Relative paths are
// resolved against the manifest file's directory.
struct SectionEntry {
  std::string section;                  // "soprano" | "alto" | "tenor" | "bass"
  std::string name;                     // report file stem, defaults to section
  std::vector<std::string> stems;
  std::vector<std::string> annotations; // empty = use the tracker
};

struct Manifest {
  std::vector<SectionEntry> sections;
};

Manifest load_manifest(const std::string& path);

struct CommandOptions {
  double hop_seconds = 0.010;
  double tolerance_cents = 30.0;
};

// Exit-code contract for all commands: 0 only if every requested output
// was produced; per-entry failures go to stderr and processing continues.
int cmd_analyze(const Manifest& manifest, const std::string& out_dir,
                const CommandOptions& opts = {});
int cmd_compare(const Manifest& manifest, const std::string& out_dir,
                const CommandOptions& opts = {});
int cmd_stu(const std::string& in_wav, const CloneParams& params,
            const std::string& out_wav);
int cmd_uts(const std::string& in_wav, const std::string& out_wav,
            const CommandOptions& opts = {});

// Listening-test conditions: stu_ps, stu_pts, stu_ts, stu_pt
// (case-insensitive). Throws for unknown names.
CloneParams stu_preset(const std::string& name);

// $UNISON_OUT_DIR when set, "." otherwise.
std::string default_out_dir();

} // namespace unison
