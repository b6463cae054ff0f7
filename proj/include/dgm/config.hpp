#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "dgm/graph.hpp"
#include "dgm/solver.hpp"
#include "dgm/video.hpp"

namespace dgm {

enum class InputKind { none, frames, matrix, synthetic };

/// Everything a pipeline run needs, filled from a flat key=value file plus
/// command-line overrides. Missing keys keep the defaults below.
struct RunConfig {
  // input selection (exactly one for commands that consume a video)
  std::string input_frames;       // directory of PGM/PPM files
  std::string input_matrix;       // DGM1 file
  bool input_synthetic = false;   // render the synth_* clip as input

  // preprocessing
  bool remove_motionless = false;
  double motionless_threshold = -1;  // < 0 selects 0.01 * pixel count
  double noise_sigma = 0;
  std::uint64_t seed = 0;

  // graph construction
  KernelKind kernel = KernelKind::exponential;
  double h_s = 1.0;
  double h_t = 1.0;
  NeighborhoodPolicy neighborhood;

  SolverConfig<double> solver;

  // synthetic clip recipe (flattened SyntheticSpec)
  Index synth_rows = 40;
  Index synth_cols = 50;
  Index synth_frames = 30;
  BackgroundKind synth_background = BackgroundKind::gradient;
  double synth_bg_value = 0.5;
  double synth_gradient_low = 0.2;
  double synth_gradient_high = 0.5;
  std::string synth_bg_image;
  ObjectKind synth_object = ObjectKind::square;
  double synth_object_intensity = 0.9;
  Index synth_object_size = 8;
  Index synth_row0 = 6;
  Index synth_col0 = 6;
  Index synth_d_row = 1;
  Index synth_d_col = 1;
  double synth_noise_sigma = 0;

  // evaluation
  std::string truth_background;  // PGM image or DGM1 matrix
  std::string truth_mask_dir;
  double fg_threshold = 0.05;

  // set from --output, never serialized
  std::string output_dir;

  InputKind input_kind() const;
  SyntheticSpec synthetic_spec() const;
  double resolved_motionless_threshold(Index pixel_count) const;
};

/// Parse a flat "key = value" file. Unknown keys, malformed lines and
/// out-of-range values raise std::runtime_error naming the line.
RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config(std::istream& in, const std::string& source_name);

/// Apply a named parameter preset (exp1, exp2, exp3) on top of `config`.
void apply_preset(RunConfig& config, const std::string& name);

/// Emit every effective key, defaults included, in a form parse_config
/// reads back to an identical configuration.
void write_resolved_config(std::ostream& out, const RunConfig& config);
void write_resolved_config(const std::filesystem::path& path, const RunConfig& config);

/// Range and consistency checks shared by parsing and the CLI.
void validate_run_config(const RunConfig& config);

}  // namespace dgm
