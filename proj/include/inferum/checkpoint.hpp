#pragma once

#include <string>

#include "inferum/policy.hpp"

namespace inferum {

// Checkpoint container, byte layout (everything little-endian):
//
//   bytes 0..3   magic "INFR"
//   bytes 4..7   format version, uint32 (currently 1)
//   bytes 8..15  metadata length M, uint64
//   M bytes      metadata, UTF-8 JSON; must carry an "arch" object with
//                obs_dim, action_count, num_agents, latent_dim, hidden_sizes
//   rest         theta as IEEE-754 doubles, one per parameter, in the
//                flat layer layout of PolicyParams
//
// The theta count is implied by arch (PolicyArch::param_count) and also
// simply by reading doubles to end-of-file.
struct Checkpoint {
    PolicyParams params;
    std::string metadata_json; // verbatim bytes from the file
};

inline constexpr uint32_t kCheckpointVersion = 1;

// Writes a checkpoint; extra_metadata_json must be a JSON object (or empty
// for none) and is merged with the generated fields ("arch", "format",
// "theta_count"). Keys are emitted sorted, so identical inputs produce
// byte-identical files.
void save_checkpoint(const std::string& path, const PolicyParams& params,
                     const std::string& extra_metadata_json = "");

// Re-emits a loaded checkpoint with its metadata bytes verbatim; used for
// byte-exact round-trips.
void resave_checkpoint(const std::string& path, const Checkpoint& ckpt);

Checkpoint load_checkpoint(const std::string& path);

// FNV-1a over the file bytes, as 16 hex chars.
std::string file_digest(const std::string& path);

std::string json_digest(const std::string& json_text);

} // namespace inferum
