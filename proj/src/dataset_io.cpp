#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include "aprox/errors.hpp"
#include "aprox/format.hpp"
#include "aprox/problems.hpp"

namespace aprox {
namespace {

double parse_double(const std::string& token, const std::string& path, long line) {
  double value = 0.0;
  const auto result = std::from_chars(token.data(), token.data() + token.size(), value);
  if (result.ec != std::errc() || result.ptr != token.data() + token.size()) {
    throw IoError(path + ":" + std::to_string(line) + ": bad number '" + token + "'");
  }
  return value;
}

}  // namespace

void write_dataset(const Dataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << to_string(data.family.tag) << ' ' << data.size() << ' ' << data.family.dim << ' '
      << data.family.classes << ' ' << format_double(data.noise_level) << '\n';
  for (Index i = 0; i < data.size(); ++i) {
    for (Index j = 0; j < data.features.cols(); ++j) out << format_double(data.features(i, j)) << ' ';
    out << format_double(data.targets(i)) << '\n';
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

Dataset read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw IoError(path + ": missing header");
  std::istringstream header(line);
  std::string tag, noise;
  Index m = 0, n = 0, classes = 0;
  if (!(header >> tag >> m >> n >> classes >> noise) || m < 1 || n < 1 || classes < 1) {
    throw IoError(path + ":1: malformed header");
  }
  Dataset data;
  try {
    data.family = LossFamily{parse_loss_tag(tag), n, classes};
  } catch (const ConfigError& e) {
    throw IoError(path + ":1: " + e.what());
  }
  data.noise_level = parse_double(noise, path, 1);
  data.noiseless = data.noise_level == 0.0 && data.family.tag != LossTag::Poisson;
  data.features.resize(m, n);
  data.targets.resize(m);
  for (Index i = 0; i < m; ++i) {
    if (!std::getline(in, line)) throw IoError(path + ": expected " + std::to_string(m) + " samples");
    std::istringstream row(line);
    std::string token;
    for (Index j = 0; j <= n; ++j) {
      if (!(row >> token)) throw IoError(path + ":" + std::to_string(i + 2) + ": too few fields");
      const double v = parse_double(token, path, static_cast<long>(i + 2));
      if (j < n) {
        data.features(i, j) = v;
      } else {
        data.targets(i) = v;
      }
    }
    if (row >> token) throw IoError(path + ":" + std::to_string(i + 2) + ": too many fields");
  }
  return data;
}

}  // namespace aprox
