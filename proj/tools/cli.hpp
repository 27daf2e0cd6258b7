#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qscat/errors.hpp"

namespace qscat::cli {

inline constexpr const char* kToolVersion = "1.0.0";

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitRegime = 4;

int exit_code_for(ErrorKind kind);

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& message, std::string code = "ConfigError")
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

// Fully resolved flat configuration. Keys are lower-case with underscores.
struct RunConfig {
  std::string subcommand;
  std::map<std::string, std::string> values;
  // Neither affects results, so both stay out of `values` and the hash.
  std::string output = "out";
  int threads = 0;  // 0: all available cores

  bool has(const std::string& key) const { return values.count(key) > 0; }
  std::string text(const std::string& key, const std::string& fallback = "") const;
  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  std::optional<double> maybe_number(const std::string& key) const;
  int integer(const std::string& key, int fallback) const;
  std::vector<double> numbers(const std::string& key) const;  // comma separated
  bool flag(const std::string& key) const;

  // FNV-1a over the canonical "subcommand\nkey=value\n..." text.
  std::string hash() const;
};

// Flat "key = value" text; '#' starts a comment.
std::map<std::string, std::string> parse_config_text(const std::string& text);

// Canned configurations for the published figures: fig1 .. fig5, plus
// "two-site" for the two-state trap model.
RunConfig figure_recipe(const std::string& name);
std::vector<std::string> figure_names();

// Executes one subcommand, writing CSV files and a manifest under the output
// directory. Returns the process exit code; errors are reported on `err` as a
// one-line JSON record.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

// Entry point used by the executable.
int main_entry(int argc, char** argv);

}  // namespace qscat::cli
