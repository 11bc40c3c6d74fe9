#pragma once

#include <filesystem>
#include <vector>

#include "sste/types.hpp"

namespace sste {

struct DetectionParams {
  double epsilon_time = 3600.0;       // max pairwise time gap, seconds
  double epsilon_dist = 200.0;        // max pairwise great-circle distance, meters
  int min_participants = 2;           // distinct users per event
  double half_life = 7.0 * 86400.0;   // recency-decay half-life, seconds

  void validate() const;
};

// Detects social events: maximal groups of check-ins whose pairwise time gaps
// are within epsilon_time, pairwise distances within epsilon_dist, and whose
// distinct users form a connected subgraph of the friendship graph with at
// least min_participants members. Groups form greedily scanning by time; the
// earliest-forming group claims its check-ins, so no check-in appears twice.
// Event time is the median member time, event coords the member centroid.
std::vector<Sste> detect_sstes(const CheckinSequence& checkins,
                               const FriendshipGraph& graph,
                               const DetectionParams& params);

// Time-ordered subsequence of `events` whose participant set contains u.
EventSequence event_sequence(const std::vector<Sste>& events, const PersonId& u);

// Gaps between consecutive event times of one user. At least two events are
// required; throws InsufficientHistory otherwise.
IntervalSeries interval_series(const std::vector<Sste>& events, const EventSequence& seq);

// Recency weight 2^(-(now - r.time)/half_life); equals 1 at zero age and halves
// every half_life seconds. Throws NumericError if the check-in is in the future.
double decayed_weight(const Checkin& r, EpochSeconds now, double half_life);

// One JSON object per line: {event_id, time, lat, lon, participants[], checkin_ids[]}.
// checkin_ids are positions into the time-sorted sequence the events came from.
void write_events_jsonl(const std::vector<Sste>& events, const std::filesystem::path& path);

std::vector<Sste> read_events_jsonl(const std::filesystem::path& path);

}  // namespace sste
