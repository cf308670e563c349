#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "unison/commands.hpp"
#include "unison/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Unison singing analysis and synthesis toolkit"};
  app.require_subcommand(1);

  std::string manifest_path;
  std::string out_dir = unison::default_out_dir();
  unison::CommandOptions opts;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", out_dir, "Output directory")
        ->capture_default_str();
    cmd->add_option("--hop", opts.hop_seconds, "Analysis hop in seconds")
        ->capture_default_str();
    cmd->add_option("--tolerance-cents", opts.tolerance_cents,
                    "Pitch tolerance for the melody metrics")
        ->capture_default_str();
  };

  CLI::App* analyze =
      app.add_subcommand("analyze", "Inter-singer pitch and timing statistics");
  analyze->add_option("--manifest", manifest_path, "Section manifest JSON")
      ->required()
      ->check(CLI::ExistingFile);
  add_common(analyze);

  CLI::App* compare = app.add_subcommand(
      "compare", "Score the mixture's tracked F0 against each singer and their mean");
  compare->add_option("--manifest", manifest_path, "Section manifest JSON")
      ->required()
      ->check(CLI::ExistingFile);
  add_common(compare);

  std::string in_wav, out_wav, preset;
  unison::CloneParams params;
  bool timbre_on = false, timbre_off = false;

  CLI::App* stu = app.add_subcommand("stu", "Render a unison from a solo voice");
  stu->add_option("input", in_wav, "Solo WAV")->required()->check(CLI::ExistingFile);
  stu->add_option("output", out_wav, "Unison WAV to write")->required();
  stu->add_option("--preset", preset,
                  "stu_ps | stu_pts | stu_ts | stu_pt (flags override)");
  stu->add_option("--std", params.std_cents, "Pitch deviation in cents");
  stu->add_option("--ts", params.ts_seconds, "Timing deviation in seconds");
  stu->add_option("--ns", params.ns, "Number of voices");
  stu->add_option("--seed", params.seed, "Random seed");
  stu->add_flag("--timbre", timbre_on, "Enable the per-clone envelope warp");
  stu->add_flag("--no-timbre", timbre_off, "Disable the per-clone envelope warp");

  CLI::App* uts =
      app.add_subcommand("uts", "Render the solo prototype of a unison mixture");
  uts->add_option("input", in_wav, "Unison WAV")->required()->check(CLI::ExistingFile);
  uts->add_option("output", out_wav, "Prototype WAV to write")->required();
  uts->add_option("--hop", opts.hop_seconds, "Analysis hop in seconds")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (analyze->parsed())
      return unison::cmd_analyze(unison::load_manifest(manifest_path), out_dir, opts);
    if (compare->parsed())
      return unison::cmd_compare(unison::load_manifest(manifest_path), out_dir, opts);
    if (stu->parsed()) {
      unison::CloneParams resolved;
      if (!preset.empty()) resolved = unison::stu_preset(preset);
      if (stu->count("--std")) resolved.std_cents = params.std_cents;
      if (stu->count("--ts")) resolved.ts_seconds = params.ts_seconds;
      if (stu->count("--ns")) resolved.ns = params.ns;
      if (stu->count("--seed")) resolved.seed = params.seed;
      if (timbre_on) resolved.timbre_variation = true;
      if (timbre_off) resolved.timbre_variation = false;
      return unison::cmd_stu(in_wav, resolved, out_wav);
    }
    if (uts->parsed()) return unison::cmd_uts(in_wav, out_wav, opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
