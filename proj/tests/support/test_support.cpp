#include "test_support.hpp"

#include <fstream>
#include <iterator>
#include <set>
#include <stdexcept>

namespace fairaudit::testing {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<double> distinct_uniform(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::set<double> seen;
  std::vector<double> out;
  while (out.size() < n) {
    const double v = u(rng);
    if (seen.insert(v).second) out.push_back(v);
  }
  return out;
}

}  // namespace fairaudit::testing
