#pragma once

#include <filesystem>

#include "sste/types.hpp"

namespace sste {

// Reads `user_id,timestamp,lat,lon` rows (one-line header, UTF-8, LF).
// Returns a validated, globally time-sorted sequence. Throws ParseError with
// the offending line number on malformed rows, out-of-range coordinates, or
// non-numeric timestamps. An empty file yields an empty sequence.
CheckinSequence parse_checkins(const std::filesystem::path& path);

// Reads `user_id_a,user_id_b` rows into an undirected graph. Duplicate and
// reversed edges are deduplicated; self-loop rows throw ParseError.
FriendshipGraph parse_friendship(const std::filesystem::path& path);

// Inverse of parse_checkins; writing then re-parsing yields an identical
// sequence.
void write_checkins(const CheckinSequence& seq, const std::filesystem::path& path);

void write_friendship(const FriendshipGraph& graph, const std::filesystem::path& path);

}  // namespace sste
