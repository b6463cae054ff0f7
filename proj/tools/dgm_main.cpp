// Command-line front end: detect / eval / synth / graph-info subcommands on
// top of the dgm library. Machine artifacts go to files, logs to stderr.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dgm/config.hpp"
#include "dgm/graph.hpp"
#include "dgm/io.hpp"
#include "dgm/metrics.hpp"
#include "dgm/prox.hpp"
#include "dgm/solver.hpp"
#include "dgm/video.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNotConverged = 1;
constexpr int kExitError = 2;

struct CommonArgs {
  std::string config_path;
  std::string preset;
  std::string output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> fg_threshold;
  bool dry_run = false;
};

void add_common_options(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "key = value configuration file");
  cmd->add_option("--preset", args.preset, "parameter preset: exp1, exp2 or exp3");
  cmd->add_option("--output", args.output_dir, "output directory");
  cmd->add_option("--seed", args.seed, "override the RNG seed");
  cmd->add_option("--fg-threshold", args.fg_threshold,
                  "override the foreground mask threshold");
}

dgm::RunConfig load_config(const CommonArgs& args) {
  dgm::RunConfig config;
  if (!args.config_path.empty()) {
    config = dgm::parse_config(args.config_path);
  }
  if (!args.preset.empty()) {
    dgm::apply_preset(config, args.preset);
  }
  if (args.seed) config.seed = *args.seed;
  if (args.fg_threshold) config.fg_threshold = *args.fg_threshold;
  if (!args.output_dir.empty()) config.output_dir = args.output_dir;
  dgm::validate_run_config(config);
  return config;
}

std::string frame_file_name(const char* stem, dgm::Index index) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%s-%04lld.pgm", stem,
                static_cast<long long>(index));
  return buffer;
}

// Resolve the synthetic recipe, loading the background image when one is
// configured.
dgm::SyntheticSpec make_synth_spec(const dgm::RunConfig& config) {
  dgm::SyntheticSpec spec = config.synthetic_spec();
  if (spec.background == dgm::BackgroundKind::image) {
    if (config.synth_bg_image.empty()) {
      throw std::runtime_error("synth_background = image needs synth_bg_image");
    }
    spec.background_image = dgm::read_frame(config.synth_bg_image);
  }
  return spec;
}

dgm::VideoMatrix<double> load_input(const dgm::RunConfig& config) {
  switch (config.input_kind()) {
    case dgm::InputKind::frames:
      return dgm::to_matrix(dgm::ingest_frames(config.input_frames));
    case dgm::InputKind::matrix:
      return dgm::read_matrix(config.input_matrix);
    case dgm::InputKind::synthetic:
      return dgm::to_matrix(dgm::synthesize(make_synth_spec(config), config.seed).frames);
    case dgm::InputKind::none:
      break;
  }
  throw std::runtime_error(
      "no input configured; set input_frames, input_matrix or input_synthetic");
}

struct Preprocessed {
  dgm::VideoMatrix<double> video;
  std::vector<dgm::Index> kept_frames;  // empty when nothing was removed
};

Preprocessed preprocess(const dgm::RunConfig& config, dgm::VideoMatrix<double> video) {
  Preprocessed out;
  if (config.remove_motionless) {
    const double threshold =
        config.resolved_motionless_threshold(video.pixel_count());
    auto [reduced, kept] = dgm::remove_motionless_frames(video, threshold);
    video = std::move(reduced);
    out.kept_frames = std::move(kept);
    std::cerr << "kept " << video.frame_count() << " frames after motionless removal\n";
  }
  if (config.noise_sigma > 0) {
    video = dgm::add_gaussian_noise(video, config.noise_sigma, config.seed);
  }
  out.video = std::move(video);
  return out;
}

struct Graphs {
  dgm::SparseLaplacian<double> spatial;
  dgm::SparseLaplacian<double> temporal;
};

Graphs build_graphs(const dgm::RunConfig& config, const dgm::VideoMatrix<double>& video) {
  Graphs graphs;
  const dgm::SimilarityKernel<double> spatial_kernel{config.kernel, config.h_s};
  const dgm::SimilarityKernel<double> temporal_kernel{config.kernel, config.h_t};
  graphs.spatial = dgm::normalized_laplacian(
      dgm::spatial_adjacency(video, spatial_kernel, config.neighborhood));
  graphs.temporal = dgm::normalized_laplacian(
      dgm::temporal_adjacency(video, temporal_kernel, config.neighborhood));
  return graphs;
}

// Streambuf forwarding to two sinks; used to show solver progress live while
// recording it as an artifact.
class TeeBuf : public std::streambuf {
 public:
  TeeBuf(std::streambuf* a, std::streambuf* b) : a_(a), b_(b) {}

 protected:
  int overflow(int ch) override {
    if (ch == EOF) return !EOF;
    const int ra = a_->sputc(static_cast<char>(ch));
    const int rb = b_->sputc(static_cast<char>(ch));
    return ra == EOF || rb == EOF ? EOF : ch;
  }
  int sync() override { return a_->pubsync() == 0 && b_->pubsync() == 0 ? 0 : -1; }

 private:
  std::streambuf* a_;
  std::streambuf* b_;
};

int cmd_detect(const CommonArgs& args) {
  const dgm::RunConfig config = load_config(args);
  if (config.input_kind() == dgm::InputKind::none) {
    throw std::runtime_error("detect: no input configured");
  }
  Preprocessed pre = preprocess(config, load_input(config));
  const dgm::VideoMatrix<double>& video = pre.video;
  std::cerr << "video: " << video.frame_rows << "x" << video.frame_cols << " pixels, "
            << video.frame_count() << " frames\n";

  const Graphs graphs = build_graphs(config, video);
  std::cerr << "graphs: spatial " << graphs.spatial.dimension() << " vertices ("
            << graphs.spatial.matrix.nonZeros() << " nnz), temporal "
            << graphs.temporal.dimension() << " vertices ("
            << graphs.temporal.matrix.nonZeros() << " nnz)\n";

  if (args.dry_run) {
    std::cerr << "dry run: configuration and graphs are valid, nothing written\n";
    return kExitOk;
  }
  if (config.output_dir.empty()) {
    throw std::runtime_error("detect: --output directory is required");
  }
  fs::create_directories(config.output_dir);
  const fs::path out_dir(config.output_dir);

  std::ofstream log_file(out_dir / "solve-log.txt");
  if (!log_file) {
    throw std::runtime_error((out_dir / "solve-log.txt").string() + ": cannot write");
  }
  log_file << std::setprecision(17);
  std::cerr << std::setprecision(10);
  TeeBuf tee(log_file.rdbuf(), std::cerr.rdbuf());
  std::ostream progress(&tee);
  progress << std::setprecision(17);

  const dgm::SeparationResult<double> result = dgm::solve(
      video.values, graphs.spatial.matrix, graphs.temporal.matrix, config.solver,
      &progress);
  std::cerr << (result.converged ? "converged" : "NOT converged") << " after "
            << result.iterations << " iterations in " << result.wall_seconds
            << " s\n";

  dgm::VideoMatrix<double> background{result.background, video.frame_rows,
                                      video.frame_cols};
  dgm::VideoMatrix<double> foreground{result.foreground, video.frame_rows,
                                      video.frame_cols};
  dgm::write_matrix(out_dir / "L.dgm", background);
  dgm::write_matrix(out_dir / "S.dgm", foreground);
  dgm::write_pgm(out_dir / "background.pgm", dgm::mean_background_image(background));

  const dgm::MaskMatrix masks =
      dgm::threshold_foreground(result.foreground, config.fg_threshold);
  for (dgm::Index j = 0; j < video.frame_count(); ++j) {
    const auto frame_mask = masks.col(j).reshaped(video.frame_rows, video.frame_cols);
    dgm::write_mask_pgm(out_dir / frame_file_name("fg", j), frame_mask.eval());
  }

  if (!pre.kept_frames.empty()) {
    std::ofstream kept(out_dir / "kept-frames.txt");
    for (dgm::Index idx : pre.kept_frames) kept << idx << '\n';
  }

  {
    std::ofstream summary(out_dir / "summary.txt");
    summary << std::setprecision(17);
    summary << "converged = " << (result.converged ? "true" : "false") << '\n'
            << "iterations = " << result.iterations << '\n'
            << "final_rel_change_L = " << result.final_rel_change_L << '\n'
            << "final_rel_change_S = " << result.final_rel_change_S << '\n';
  }
  dgm::write_resolved_config(out_dir / "resolved-config.txt", config);

  return result.converged ? kExitOk : kExitNotConverged;
}

int cmd_synth(const CommonArgs& args) {
  const dgm::RunConfig config = load_config(args);
  if (config.output_dir.empty()) {
    throw std::runtime_error("synth: --output directory is required");
  }
  const dgm::SyntheticVideo<double> clip =
      dgm::synthesize(make_synth_spec(config), config.seed);
  fs::create_directories(config.output_dir);
  const fs::path out_dir(config.output_dir);
  std::ofstream manifest(out_dir / "frames.txt");  // lets detect ingest the
                                                   // directory without
                                                   // picking up the masks
  for (dgm::Index j = 0; j < clip.frames.frame_count(); ++j) {
    const std::string frame_name = frame_file_name("frame", j);
    dgm::write_pgm(out_dir / frame_name, clip.frames.frames[static_cast<std::size_t>(j)]);
    manifest << frame_name << '\n';
    const auto mask = clip.masks.col(j).reshaped(clip.frames.frame_rows(),
                                                 clip.frames.frame_cols());
    dgm::write_mask_pgm(out_dir / frame_file_name("mask", j), mask.eval());
  }
  manifest.close();
  dgm::write_pgm(out_dir / "truth-background.pgm", clip.background);
  dgm::write_resolved_config(out_dir / "resolved-config.txt", config);
  std::cerr << "wrote " << clip.frames.frame_count() << " frames + masks to "
            << out_dir << "\n";
  return kExitOk;
}

int cmd_eval(const CommonArgs& args, const std::string& csv_path) {
  const auto started = std::chrono::steady_clock::now();
  const dgm::RunConfig config = load_config(args);
  if (config.output_dir.empty()) {
    throw std::runtime_error("eval: --output must point at a detect output directory");
  }
  const fs::path out_dir(config.output_dir);
  const dgm::VideoMatrix<double> background = dgm::read_matrix(out_dir / "L.dgm");
  const dgm::VideoMatrix<double> foreground = dgm::read_matrix(out_dir / "S.dgm");

  dgm::EvalReport report;
  report.fg_threshold = config.fg_threshold;

  if (config.truth_background.empty()) {
    throw std::runtime_error("eval: truth_background is required");
  }
  const fs::path truth_path(config.truth_background);
  if (!fs::exists(truth_path)) {
    throw std::runtime_error(truth_path.string() + ": missing truth background");
  }
  dgm::MatrixX<double> truth_frame;
  if (truth_path.extension() == ".dgm") {
    const dgm::VideoMatrix<double> truth = dgm::read_matrix(truth_path);
    truth_frame = dgm::mean_background_image(truth);
    report.re_matrix = dgm::relative_error(background.values, truth.values);
    report.psnr_matrix = dgm::psnr(background.values, truth.values);
    report.has_matrix_metrics = true;
  } else {
    truth_frame = dgm::read_frame(truth_path);
    // The static-background truth matrix replicates the frame per column.
    if (truth_frame.size() == background.pixel_count()) {
      const dgm::MatrixX<double> truth_matrix =
          truth_frame.reshaped() *
          dgm::MatrixX<double>::Ones(1, background.frame_count());
      report.re_matrix = dgm::relative_error(background.values, truth_matrix);
      report.psnr_matrix = dgm::psnr(background.values, truth_matrix);
      report.has_matrix_metrics = true;
    }
  }
  const dgm::MatrixX<double> mean_image = dgm::mean_background_image(background);
  report.re_mean_image = dgm::relative_error(mean_image, truth_frame);
  report.psnr_mean_image = dgm::psnr(mean_image, truth_frame);

  if (!config.truth_mask_dir.empty()) {
    if (!fs::is_directory(config.truth_mask_dir)) {
      throw std::runtime_error(config.truth_mask_dir + ": missing truth mask directory");
    }
    std::vector<fs::path> mask_files;
    for (const auto& entry : fs::directory_iterator(config.truth_mask_dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".pgm" &&
          entry.path().filename().string().rfind("mask", 0) == 0) {
        mask_files.push_back(entry.path());
      }
    }
    std::sort(mask_files.begin(), mask_files.end());
    if (static_cast<dgm::Index>(mask_files.size()) != foreground.frame_count()) {
      throw std::runtime_error("eval: found " + std::to_string(mask_files.size()) +
                               " truth masks for " +
                               std::to_string(foreground.frame_count()) + " frames");
    }
    dgm::MaskMatrix truth_masks(foreground.pixel_count(), foreground.frame_count());
    for (std::size_t j = 0; j < mask_files.size(); ++j) {
      const auto mask = dgm::read_mask_pgm(mask_files[j]);
      truth_masks.col(static_cast<dgm::Index>(j)) = mask.reshaped();
    }
    const dgm::MaskMatrix predicted =
        dgm::threshold_foreground(foreground.values, config.fg_threshold);
    const dgm::PrReFm scores = dgm::pr_re_fm(predicted, truth_masks);
    report.precision = scores.precision;
    report.recall = scores.recall;
    report.f_measure = scores.f_measure;
    report.degenerate_masks = scores.degenerate;
    report.has_mask_metrics = true;
  }

  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();

  std::ostringstream block;
  block << std::setprecision(17);
  block << "re_mean_image = " << report.re_mean_image << '\n'
        << "psnr_mean_image = " << report.psnr_mean_image << '\n';
  if (report.has_matrix_metrics) {
    block << "re_matrix = " << report.re_matrix << '\n'
          << "psnr_matrix = " << report.psnr_matrix << '\n';
  }
  if (report.has_mask_metrics) {
    block << "precision = " << report.precision << '\n'
          << "recall = " << report.recall << '\n'
          << "f_measure = " << report.f_measure << '\n'
          << "degenerate_masks = " << (report.degenerate_masks ? "true" : "false")
          << '\n';
  }
  block << "fg_threshold = " << report.fg_threshold << '\n'
        << "runtime_seconds = " << report.runtime_seconds << '\n';

  std::cout << block.str();
  std::ofstream report_file(out_dir / "eval-report.txt");
  report_file << block.str();
  // Named so it never clobbers the detect run's own resolved config.
  dgm::write_resolved_config(out_dir / "eval-resolved-config.txt", config);

  if (!csv_path.empty()) {
    const bool fresh = !fs::exists(csv_path);
    std::ofstream csv(csv_path, std::ios::app);
    csv << std::setprecision(17);
    if (fresh) {
      csv << "re_mean_image,psnr_mean_image,re_matrix,psnr_matrix,"
             "precision,recall,f_measure,fg_threshold,runtime_seconds\n";
    }
    csv << report.re_mean_image << ',' << report.psnr_mean_image << ','
        << report.re_matrix << ',' << report.psnr_matrix << ',' << report.precision
        << ',' << report.recall << ',' << report.f_measure << ','
        << report.fg_threshold << ',' << report.runtime_seconds << '\n';
  }
  return kExitOk;
}

// Deterministic power iteration; phi is symmetric with spectrum in [0, 2].
double estimate_extreme_eigenvalue(const dgm::SparseMatrixX<double>& phi, bool largest) {
  const dgm::Index dim = phi.rows();
  Eigen::VectorXd v(dim);
  for (dgm::Index i = 0; i < dim; ++i) {
    v(i) = 1.0 + static_cast<double>(i % 7) / 7.0;
  }
  v.normalize();
  const double shift = 2.0;
  double eig = 0;
  for (int it = 0; it < 200; ++it) {
    Eigen::VectorXd w = largest ? Eigen::VectorXd(phi * v)
                                : Eigen::VectorXd(shift * v - phi * v);
    const double norm = w.norm();
    if (norm == 0) return 0;  // hit an exact null vector
    v = w / norm;
    eig = v.dot(phi * v);
  }
  return eig;
}

int cmd_graph_info(const CommonArgs& args) {
  const dgm::RunConfig config = load_config(args);
  if (config.input_kind() == dgm::InputKind::none) {
    throw std::runtime_error("graph-info: no input configured");
  }
  const Preprocessed pre = preprocess(config, load_input(config));

  const dgm::SimilarityKernel<double> spatial_kernel{config.kernel, config.h_s};
  const dgm::SimilarityKernel<double> temporal_kernel{config.kernel, config.h_t};
  const auto a_s = dgm::spatial_adjacency(pre.video, spatial_kernel, config.neighborhood);
  const auto a_t = dgm::temporal_adjacency(pre.video, temporal_kernel, config.neighborhood);
  const auto phi_s = dgm::normalized_laplacian(a_s);
  const auto phi_t = dgm::normalized_laplacian(a_t);

  auto describe = [](const char* name, const dgm::SparseLaplacian<double>& lap) {
    std::cout << name << "_dimension = " << lap.dimension() << '\n'
              << name << "_nnz = " << lap.matrix.nonZeros() << '\n'
              << name << "_min_degree = " << lap.degrees.minCoeff() << '\n'
              << name << "_max_degree = " << lap.degrees.maxCoeff() << '\n'
              << name << "_eig_max_estimate = "
              << estimate_extreme_eigenvalue(lap.matrix, true) << '\n'
              << name << "_eig_min_estimate = "
              << estimate_extreme_eigenvalue(lap.matrix, false) << '\n';
  };
  std::cout << std::setprecision(10);
  describe("phi_s", phi_s);
  describe("phi_t", phi_t);

  if (!config.output_dir.empty()) {
    fs::create_directories(config.output_dir);
    const fs::path out_dir(config.output_dir);
    dgm::write_triplets(out_dir / "phi_s.dgl", phi_s.matrix);
    dgm::write_triplets(out_dir / "phi_t.dgl", phi_t.matrix);
    dgm::write_resolved_config(out_dir / "resolved-config.txt", config);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"robust dual-graph regularized foreground/background separation"};
  app.require_subcommand(1);

  CommonArgs detect_args, eval_args, synth_args, info_args;
  std::string csv_path;

  CLI::App* detect = app.add_subcommand("detect", "separate background and foreground");
  add_common_options(detect, detect_args);
  detect->add_flag("--dry-run", detect_args.dry_run,
                   "validate config and graphs, write nothing");

  CLI::App* eval = app.add_subcommand("eval", "score detect output against ground truth");
  add_common_options(eval, eval_args);
  eval->add_option("--csv", csv_path, "append the report as one CSV row");

  CLI::App* synth = app.add_subcommand("synth", "render a synthetic clip with ground truth");
  add_common_options(synth, synth_args);

  CLI::App* info = app.add_subcommand("graph-info", "build and describe both graph Laplacians");
  add_common_options(info, info_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitError;
  }

  try {
    if (detect->parsed()) return cmd_detect(detect_args);
    if (eval->parsed()) return cmd_eval(eval_args, csv_path);
    if (synth->parsed()) return cmd_synth(synth_args);
    if (info->parsed()) return cmd_graph_info(info_args);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
