#include "lvi/rng.hpp"

#include "lvi/errors.hpp"

namespace lvi {

std::uint64_t derive_seed(std::uint64_t base, StreamDomain domain, std::uint64_t index) {
  if (index > kMaxStreamIndex) throw DomainError("stream index exceeds 2^56 - 1");
  const std::uint64_t key = (static_cast<std::uint64_t>(domain) << 56) | index;
  return mix64(base ^ mix64(key));
}

}  // namespace lvi
