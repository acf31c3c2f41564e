#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "crossdiff/grid.hpp"
#include "crossdiff/state.hpp"
#include "crossdiff/stepper.hpp"
#include "crossdiff/system.hpp"

namespace crossdiff {

/// All parse/validation violations at once, not just the first.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> messages);
  const std::vector<std::string>& messages() const { return messages_; }

 private:
  std::vector<std::string> messages_;
};

enum class InitialProfile { Constant, GaussianBump, Checkerboard, File };

struct RunConfig {
  // [grid]
  int dim = 1;
  std::vector<int> extents{64};
  std::vector<double> lengths{1.0};
  // [system]
  PowerLawParams params;
  bool reactions = true;
  // [scheme]
  SchemeConfig scheme;
  // [initial]
  InitialProfile profile = InitialProfile::Constant;
  std::vector<double> init_value{1.0, 1.0};      // constant profile
  std::vector<double> init_center{0.5};          // bump center per axis
  double init_width = 0.1;
  std::vector<double> init_amplitude{1.0, 1.0};  // per species
  double init_floor = 0.1;
  std::string init_file;
  // [output]
  std::string out_dir = "out";
  int snapshot_stride = 0;  // 0 = n_steps/10
  bool audits = true;
  double entropy_slack_c = 10.0;  // c in eps_h = c * h^2 * Gamma_k
  double entropy_K = 0.0;         // cumulative-bound constant; 0 skips it
  // top level
  unsigned long long seed = 0;

  int resolved_snapshot_stride() const;
};

// Flat sectioned key = value grammar; '#' starts a comment.  Throws
// ConfigError carrying every violation with its line number.
RunConfig parse_config(const std::string& text);

// Canonical text that parses back to an equivalent RunConfig.
std::string render_config(const RunConfig& cfg);

Grid make_grid(const RunConfig& cfg);
CrossDiffusionSystem make_system(const RunConfig& cfg);
SpeciesState make_initial_state(const RunConfig& cfg, const Grid& g);

// fields_XXXXXX.csv reader used by the `file` profile (cell-major rows,
// one column per species, '#' metadata line and a header row).
SpeciesState read_fields_csv(const std::string& path, const Grid& g, int species);

}  // namespace crossdiff
