#include "dgm/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace dgm {

namespace {

std::string trim(const std::string& s) {
  std::size_t begin = 0;
  std::size_t end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  return s.substr(begin, end - begin);
}

double parse_double(const std::string& value) {
  char* end = nullptr;
  const double parsed = std::strtod(value.c_str(), &end);
  if (end != value.c_str() + value.size() || value.empty()) {
    throw std::runtime_error("expected a number, got '" + value + "'");
  }
  return parsed;
}

long long parse_integer(const std::string& value) {
  std::size_t used = 0;
  long long parsed = 0;
  try {
    parsed = std::stoll(value, &used);
  } catch (const std::exception&) {
    throw std::runtime_error("expected an integer, got '" + value + "'");
  }
  if (used != value.size()) {
    throw std::runtime_error("expected an integer, got '" + value + "'");
  }
  return parsed;
}

bool parse_bool(const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::runtime_error("expected true/false, got '" + value + "'");
}

std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

struct KeyHandler {
  std::string name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

std::vector<KeyHandler> build_registry() {
  std::vector<KeyHandler> keys;
  auto add = [&keys](std::string name,
                     std::function<void(RunConfig&, const std::string&)> set,
                     std::function<std::string(const RunConfig&)> get) {
    keys.push_back({std::move(name), std::move(set), std::move(get)});
  };
  auto add_double = [&add](const std::string& name, double RunConfig::* field) {
    add(name,
        [field](RunConfig& c, const std::string& v) { c.*field = parse_double(v); },
        [field](const RunConfig& c) { return format_double(c.*field); });
  };
  auto add_solver = [&add](const std::string& name, double SolverConfig<double>::* field) {
    add(name,
        [field](RunConfig& c, const std::string& v) { c.solver.*field = parse_double(v); },
        [field](const RunConfig& c) { return format_double(c.solver.*field); });
  };
  auto add_index = [&add](const std::string& name, Index RunConfig::* field) {
    add(name,
        [field](RunConfig& c, const std::string& v) {
          c.*field = static_cast<Index>(parse_integer(v));
        },
        [field](const RunConfig& c) { return std::to_string(c.*field); });
  };
  auto add_string = [&add](const std::string& name, std::string RunConfig::* field) {
    add(name,
        [field](RunConfig& c, const std::string& v) { c.*field = v; },
        [field](const RunConfig& c) { return c.*field; });
  };
  auto add_bool = [&add](const std::string& name, bool RunConfig::* field) {
    add(name,
        [field](RunConfig& c, const std::string& v) { c.*field = parse_bool(v); },
        [field](const RunConfig& c) { return c.*field ? "true" : "false"; });
  };

  add_string("input_frames", &RunConfig::input_frames);
  add_string("input_matrix", &RunConfig::input_matrix);
  add_bool("input_synthetic", &RunConfig::input_synthetic);

  add_bool("remove_motionless", &RunConfig::remove_motionless);
  add("motionless_threshold",
      [](RunConfig& c, const std::string& v) {
        c.motionless_threshold = v == "auto" ? -1.0 : parse_double(v);
      },
      [](const RunConfig& c) {
        return c.motionless_threshold < 0 ? "auto"
                                          : format_double(c.motionless_threshold);
      });
  add_double("noise_sigma", &RunConfig::noise_sigma);
  add("seed",
      [](RunConfig& c, const std::string& v) {
        c.seed = static_cast<std::uint64_t>(parse_integer(v));
      },
      [](const RunConfig& c) { return std::to_string(c.seed); });

  add("kernel",
      [](RunConfig& c, const std::string& v) {
        if (v == "exponential") c.kernel = KernelKind::exponential;
        else if (v == "cosine") c.kernel = KernelKind::cosine;
        else throw std::runtime_error("kernel must be exponential or cosine");
      },
      [](const RunConfig& c) {
        return c.kernel == KernelKind::exponential ? "exponential" : "cosine";
      });
  add_double("h_s", &RunConfig::h_s);
  add_double("h_t", &RunConfig::h_t);
  add("patch_side",
      [](RunConfig& c, const std::string& v) {
        c.neighborhood.patch_side = static_cast<int>(parse_integer(v));
      },
      [](const RunConfig& c) { return std::to_string(c.neighborhood.patch_side); });
  add("half_width",
      [](RunConfig& c, const std::string& v) {
        c.neighborhood.half_width = static_cast<int>(parse_integer(v));
      },
      [](const RunConfig& c) { return std::to_string(c.neighborhood.half_width); });

  add_solver("lambda1", &SolverConfig<double>::lambda1);
  add_solver("lambda2", &SolverConfig<double>::lambda2);
  add_solver("gamma1", &SolverConfig<double>::gamma1);
  add_solver("gamma2", &SolverConfig<double>::gamma2);
  add_solver("rho1", &SolverConfig<double>::rho1);
  add_solver("rho2", &SolverConfig<double>::rho2);
  add_solver("dt", &SolverConfig<double>::dt);
  add_solver("beta", &SolverConfig<double>::beta);
  add_solver("lambda2_floor", &SolverConfig<double>::lambda2_floor);
  add("erf_sigma",
      [](RunConfig& c, const std::string& v) {
        if (v == "adaptive") c.solver.erf_sigma.reset();
        else c.solver.erf_sigma = parse_double(v);
      },
      [](const RunConfig& c) {
        return c.solver.erf_sigma ? format_double(*c.solver.erf_sigma) : "adaptive";
      });
  add_solver("tol", &SolverConfig<double>::tol);
  add("t_out",
      [](RunConfig& c, const std::string& v) {
        c.solver.t_out = static_cast<int>(parse_integer(v));
      },
      [](const RunConfig& c) { return std::to_string(c.solver.t_out); });
  add("t_in",
      [](RunConfig& c, const std::string& v) {
        c.solver.t_in = static_cast<int>(parse_integer(v));
      },
      [](const RunConfig& c) { return std::to_string(c.solver.t_in); });
  add("decay_period",
      [](RunConfig& c, const std::string& v) {
        c.solver.decay_period = static_cast<int>(parse_integer(v));
      },
      [](const RunConfig& c) { return std::to_string(c.solver.decay_period); });
  add("v_sign",
      [](RunConfig& c, const std::string& v) {
        if (v == "printed") c.solver.v_sign = VSign::printed;
        else if (v == "constraint") c.solver.v_sign = VSign::constraint;
        else throw std::runtime_error("v_sign must be printed or constraint");
      },
      [](const RunConfig& c) {
        return c.solver.v_sign == VSign::printed ? "printed" : "constraint";
      });
  add("weight_mode",
      [](RunConfig& c, const std::string& v) {
        if (v == "erf") c.solver.weight_mode = WeightMode::erf;
        else if (v == "ones") c.solver.weight_mode = WeightMode::ones;
        else throw std::runtime_error("weight_mode must be erf or ones");
      },
      [](const RunConfig& c) {
        return c.solver.weight_mode == WeightMode::erf ? "erf" : "ones";
      });

  add_index("synth_rows", &RunConfig::synth_rows);
  add_index("synth_cols", &RunConfig::synth_cols);
  add_index("synth_frames", &RunConfig::synth_frames);
  add("synth_background",
      [](RunConfig& c, const std::string& v) {
        if (v == "constant") c.synth_background = BackgroundKind::constant;
        else if (v == "gradient") c.synth_background = BackgroundKind::gradient;
        else if (v == "image") c.synth_background = BackgroundKind::image;
        else throw std::runtime_error("synth_background must be constant, gradient or image");
      },
      [](const RunConfig& c) {
        switch (c.synth_background) {
          case BackgroundKind::constant: return "constant";
          case BackgroundKind::gradient: return "gradient";
          case BackgroundKind::image: return "image";
        }
        return "gradient";
      });
  add_double("synth_bg_value", &RunConfig::synth_bg_value);
  add_double("synth_gradient_low", &RunConfig::synth_gradient_low);
  add_double("synth_gradient_high", &RunConfig::synth_gradient_high);
  add_string("synth_bg_image", &RunConfig::synth_bg_image);
  add("synth_object",
      [](RunConfig& c, const std::string& v) {
        if (v == "square") c.synth_object = ObjectKind::square;
        else if (v == "disk") c.synth_object = ObjectKind::disk;
        else if (v == "none") c.synth_object = ObjectKind::none;
        else throw std::runtime_error("synth_object must be square, disk or none");
      },
      [](const RunConfig& c) {
        switch (c.synth_object) {
          case ObjectKind::square: return "square";
          case ObjectKind::disk: return "disk";
          case ObjectKind::none: return "none";
        }
        return "square";
      });
  add_double("synth_object_intensity", &RunConfig::synth_object_intensity);
  add_index("synth_object_size", &RunConfig::synth_object_size);
  add_index("synth_row0", &RunConfig::synth_row0);
  add_index("synth_col0", &RunConfig::synth_col0);
  add_index("synth_d_row", &RunConfig::synth_d_row);
  add_index("synth_d_col", &RunConfig::synth_d_col);
  add_double("synth_noise_sigma", &RunConfig::synth_noise_sigma);

  add_string("truth_background", &RunConfig::truth_background);
  add_string("truth_mask_dir", &RunConfig::truth_mask_dir);
  add_double("fg_threshold", &RunConfig::fg_threshold);
  return keys;
}

const std::vector<KeyHandler>& registry() {
  static const std::vector<KeyHandler> keys = build_registry();
  return keys;
}

const KeyHandler* find_key(const std::string& name) {
  for (const KeyHandler& key : registry()) {
    if (key.name == name) return &key;
  }
  return nullptr;
}

}  // namespace

InputKind RunConfig::input_kind() const {
  const int sources = (input_frames.empty() ? 0 : 1) +
                      (input_matrix.empty() ? 0 : 1) + (input_synthetic ? 1 : 0);
  if (sources > 1) {
    throw std::runtime_error("exactly one input source may be set "
                             "(input_frames, input_matrix, input_synthetic)");
  }
  if (!input_frames.empty()) return InputKind::frames;
  if (!input_matrix.empty()) return InputKind::matrix;
  if (input_synthetic) return InputKind::synthetic;
  return InputKind::none;
}

SyntheticSpec RunConfig::synthetic_spec() const {
  SyntheticSpec spec;
  spec.frame_rows = synth_rows;
  spec.frame_cols = synth_cols;
  spec.background = synth_background;
  spec.background_value = synth_bg_value;
  spec.gradient_low = synth_gradient_low;
  spec.gradient_high = synth_gradient_high;
  spec.object = synth_object;
  spec.object_intensity = synth_object_intensity;
  spec.object_size = synth_object_size;
  spec.trajectory =
      linear_trajectory(synth_row0, synth_col0, synth_d_row, synth_d_col, synth_frames);
  spec.noise_sigma = synth_noise_sigma;
  return spec;
}

double RunConfig::resolved_motionless_threshold(Index pixel_count) const {
  return motionless_threshold < 0 ? 0.01 * static_cast<double>(pixel_count)
                                  : motionless_threshold;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error(path.string() + ": cannot open config file");
  }
  return parse_config(in, path.string());
}

RunConfig parse_config(std::istream& in, const std::string& source_name) {
  RunConfig config;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const std::size_t eq = text.find('=');
    auto located = [&](const std::string& message) {
      return std::runtime_error(source_name + ":" + std::to_string(line_number) +
                                ": " + message);
    };
    if (eq == std::string::npos) {
      throw located("expected 'key = value'");
    }
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    const KeyHandler* handler = find_key(key);
    if (!handler) {
      throw located("unknown key '" + key + "'");
    }
    try {
      handler->set(config, value);
    } catch (const std::exception& err) {
      throw located(key + ": " + err.what());
    }
  }
  validate_run_config(config);
  return config;
}

void apply_preset(RunConfig& config, const std::string& name) {
  auto& s = config.solver;
  if (name == "exp1") {
    s.lambda1 = 1e2;  s.lambda2 = 1e-1; s.gamma1 = 1e-6; s.gamma2 = 1e-8;
    s.rho1 = 1;       s.rho2 = 1;       s.dt = 1e-1;     s.beta = 1;
  } else if (name == "exp2") {
    s.lambda1 = 1e-4; s.lambda2 = 1e-1; s.gamma1 = 1e-5; s.gamma2 = 1e5;
    s.rho1 = 1e-3;    s.rho2 = 1e1;     s.dt = 1e-5;     s.beta = 1.05;
  } else if (name == "exp3") {
    s.lambda1 = 1e5;  s.lambda2 = 1;    s.gamma1 = 1e-6; s.gamma2 = 1e-8;
    s.rho1 = 1e1;     s.rho2 = 1e-2;    s.dt = 1e-1;     s.beta = 1;
  } else {
    throw std::runtime_error("unknown preset '" + name + "' (want exp1, exp2 or exp3)");
  }
}

void write_resolved_config(std::ostream& out, const RunConfig& config) {
  out << "# resolved configuration: every effective value, defaults included\n";
  for (const KeyHandler& key : registry()) {
    const std::string value = key.get(config);
    if (value.empty()) continue;  // unset path-style keys
    out << key.name << " = " << value << '\n';
  }
}

void write_resolved_config(const std::filesystem::path& path, const RunConfig& config) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error(path.string() + ": cannot write resolved config");
  }
  write_resolved_config(out, config);
}

void validate_run_config(const RunConfig& config) {
  validate(config.solver);
  config.input_kind();  // throws when several sources are set
  if (config.kernel == KernelKind::exponential && (!(config.h_s > 0) || !(config.h_t > 0))) {
    throw std::runtime_error("h_s and h_t must be positive");
  }
  if (config.neighborhood.patch_side <= 0 || config.neighborhood.patch_side % 2 == 0) {
    throw std::runtime_error("patch_side must be odd and positive");
  }
  if (config.neighborhood.half_width < 1) {
    throw std::runtime_error("half_width must be >= 1");
  }
  if (config.noise_sigma < 0 || config.synth_noise_sigma < 0) {
    throw std::runtime_error("noise sigma must be nonnegative");
  }
  if (config.fg_threshold < 0) {
    throw std::runtime_error("fg_threshold must be nonnegative");
  }
  if (config.synth_rows <= 0 || config.synth_cols <= 0 || config.synth_frames <= 0) {
    throw std::runtime_error("synthetic shape must be positive");
  }
  if (config.synth_object_intensity < 0 || config.synth_object_intensity > 1) {
    throw std::runtime_error("synth_object_intensity must lie in [0, 1]");
  }
}

}  // namespace dgm
