#include "sste/types.hpp"

#include <algorithm>

namespace sste {

CheckinSequence CheckinSequence::from_records(std::vector<Checkin> records) {
  for (const auto& r : records) {
    if (r.lat < -90.0 || r.lat > 90.0 || r.lon < -180.0 || r.lon > 180.0) {
      throw ParseError("coordinate out of range for user '" + r.user + "'");
    }
  }
  std::vector<std::size_t> order(records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (records[a].time != records[b].time) return records[a].time < records[b].time;
    if (records[a].user != records[b].user) return records[a].user < records[b].user;
    return a < b;  // input order as final tiebreak
  });

  CheckinSequence seq;
  seq.records_.reserve(records.size());
  for (std::size_t i : order) seq.records_.push_back(std::move(records[i]));
  for (std::size_t i = 0; i < seq.records_.size(); ++i) {
    seq.user_index_[seq.records_[i].user].push_back(i);
  }
  return seq;
}

const std::vector<std::size_t>& CheckinSequence::positions_of(const PersonId& user) const {
  static const std::vector<std::size_t> kEmpty;
  auto it = user_index_.find(user);
  return it == user_index_.end() ? kEmpty : it->second;
}

void FriendshipGraph::add_person(const PersonId& u) { adj_[u]; }

void FriendshipGraph::add_edge(const PersonId& a, const PersonId& b) {
  if (a == b) throw ParseError("self-loop edge for '" + a + "'");
  if (adj_[a].insert(b).second) {
    adj_[b].insert(a);
    ++edge_count_;
  } else {
    adj_[b];  // reversed duplicate: still make sure both persons exist
  }
}

bool FriendshipGraph::are_friends(const PersonId& a, const PersonId& b) const {
  auto it = adj_.find(a);
  return it != adj_.end() && it->second.count(b) != 0;
}

const std::set<PersonId>& FriendshipGraph::friends_of(const PersonId& u) const {
  static const std::set<PersonId> kEmpty;
  auto it = adj_.find(u);
  return it == adj_.end() ? kEmpty : it->second;
}

}  // namespace sste
