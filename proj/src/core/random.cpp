#include "mra/random.hpp"

#include <sstream>
#include <vector>

#include "mra/error.hpp"

namespace mra {

Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream) {
  std::vector<std::uint32_t> words;
  words.reserve(2 + 2 * stream.size());
  auto push = [&](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(seed);
  for (auto s : stream) push(s);
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

std::uint64_t derive_seed(std::uint64_t seed,
                          std::initializer_list<std::uint64_t> stream) {
  auto rng = make_rng(seed, stream);
  return rng();
}

std::string serialize_rng(const Rng& rng) {
  std::ostringstream out;
  out << rng;
  return out.str();
}

Rng deserialize_rng(const std::string& state) {
  std::istringstream in(state);
  Rng rng;
  in >> rng;
  if (in.fail()) fail(ErrorKind::corrupt_checkpoint, "unreadable rng state");
  return rng;
}

double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

double sample_beta(Rng& rng, double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0)) {
    fail(ErrorKind::validation, "beta distribution parameters must be positive");
  }
  const double x = std::gamma_distribution<double>(alpha, 1.0)(rng);
  const double y = std::gamma_distribution<double>(beta, 1.0)(rng);
  if (x + y == 0.0) return 0.5;
  return x / (x + y);
}

}  // namespace mra
