#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace sste {

using PersonId = std::string;
using EpochSeconds = std::int64_t;

// Malformed input data; message carries the offending file/line.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A sequence is too short for the requested operation.
class InsufficientHistory : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Zero-variance (constant) series where a correlation structure is required.
class DegenerateSeries : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// No candidate region exists; the location prediction abstains.
class NoCandidates : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite intermediate in a numeric update; the state was rolled back.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One user's timestamped, geolocated record. The check-in time is also the
// anchor for recency-decayed influence weights.
struct Checkin {
  PersonId user;
  EpochSeconds time = 0;
  double lat = 0.0;
  double lon = 0.0;

  bool operator==(const Checkin&) const = default;
};

// Globally time-sorted check-ins with a per-user index. Ties are broken by
// (user id, input order), so construction is deterministic. Immutable after
// construction and safe for concurrent reads.
class CheckinSequence {
 public:
  CheckinSequence() = default;

  // Sorts, validates coordinate ranges, and builds the user index.
  static CheckinSequence from_records(std::vector<Checkin> records);

  const std::vector<Checkin>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const Checkin& operator[](std::size_t i) const { return records_[i]; }

  // Positions (into records()) of one user's check-ins, time-ascending.
  const std::vector<std::size_t>& positions_of(const PersonId& user) const;

  const std::map<PersonId, std::vector<std::size_t>>& user_index() const {
    return user_index_;
  }
  std::size_t user_count() const { return user_index_.size(); }

 private:
  std::vector<Checkin> records_;
  std::map<PersonId, std::vector<std::size_t>> user_index_;
};

// Undirected friendship graph. No self-loops; adjacency is symmetric.
class FriendshipGraph {
 public:
  void add_person(const PersonId& u);
  // Inserts an undirected edge; duplicates and reversed pairs collapse.
  // Self-loops are rejected.
  void add_edge(const PersonId& a, const PersonId& b);

  bool has_person(const PersonId& u) const { return adj_.count(u) != 0; }
  bool are_friends(const PersonId& a, const PersonId& b) const;

  // Neighbor set of u; empty for unknown or isolated persons.
  const std::set<PersonId>& friends_of(const PersonId& u) const;

  const std::map<PersonId, std::set<PersonId>>& adjacency() const { return adj_; }
  std::size_t person_count() const { return adj_.size(); }
  std::size_t edge_count() const { return edge_count_; }

 private:
  std::map<PersonId, std::set<PersonId>> adj_;
  std::size_t edge_count_ = 0;
};

// A detected social event: the participating users, the check-ins that formed
// it, and a representative time (median of member times) and location
// (centroid of member coordinates).
struct Sste {
  std::set<PersonId> participants;
  std::vector<std::size_t> member_checkins;  // positions into the CheckinSequence
  EpochSeconds time = 0;
  double lat = 0.0;
  double lon = 0.0;
};

// Time-ordered events involving one user, as indices into a shared event list.
struct EventSequence {
  PersonId user;
  std::vector<std::size_t> events;

  std::size_t size() const { return events.size(); }
};

// Gaps between consecutive events of one user, in seconds; strictly positive.
struct IntervalSeries {
  PersonId user;
  std::vector<double> values;
};

}  // namespace sste
