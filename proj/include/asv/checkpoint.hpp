#pragma once

// Binary checkpoint layout (all integers and reals little-endian):
//
//   char[8]  magic "ASVPPOCK"
//   u32      format version (1)
//   u32      observation size, hidden width, action size
//   f64[obs] feature scaling divisors
//   u64      iteration, total environment steps, Adam step count,
//            parameter count P
//   f64[P]   parameters in PolicyValueNet flat order
//   f64[P]   Adam first moments
//   f64[P]   Adam second moments

#include <cstdint>
#include <filesystem>
#include <string>

#include "asv/policy.hpp"
#include "asv/ppo.hpp"

namespace asv {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  PolicyValueNet net;
  AdamState adam = AdamState::zeros(PolicyValueNet::kNumParams);
  std::uint64_t iteration = 0;
  std::uint64_t total_steps = 0;
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(const std::string& bytes, const std::string& source = "<memory>");
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& file);
Checkpoint load_checkpoint(const std::filesystem::path& file);

}  // namespace asv
