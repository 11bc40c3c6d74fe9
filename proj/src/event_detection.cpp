#include "sste/event_detection.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "sste/geo.hpp"

namespace sste {

void DetectionParams::validate() const {
  if (!(epsilon_time > 0.0)) throw std::invalid_argument("epsilon_time must be > 0");
  if (!(epsilon_dist > 0.0)) throw std::invalid_argument("epsilon_dist must be > 0");
  if (min_participants < 2) throw std::invalid_argument("min_participants must be >= 2");
  if (!(half_life > 0.0)) throw std::invalid_argument("half_life must be > 0");
}

namespace {

bool compatible(const Checkin& a, const Checkin& b, const DetectionParams& p) {
  const double gap = std::abs(static_cast<double>(a.time - b.time));
  if (gap > p.epsilon_time) return false;
  return haversine_m(a.lat, a.lon, b.lat, b.lon) <= p.epsilon_dist;
}

// Users reachable from `start` within the subgraph induced by `users`.
std::set<PersonId> reachable_users(const FriendshipGraph& g,
                                   const std::set<PersonId>& users,
                                   const PersonId& start) {
  std::set<PersonId> seen{start};
  std::deque<PersonId> frontier{start};
  while (!frontier.empty()) {
    PersonId u = frontier.front();
    frontier.pop_front();
    for (const auto& v : g.friends_of(u)) {
      if (users.count(v) != 0 && seen.insert(v).second) frontier.push_back(v);
    }
  }
  return seen;
}

Sste summarize(const CheckinSequence& checkins, std::vector<std::size_t> members) {
  Sste event;
  event.member_checkins = std::move(members);
  std::vector<EpochSeconds> times;
  times.reserve(event.member_checkins.size());
  double lat = 0.0, lon = 0.0;
  for (std::size_t m : event.member_checkins) {
    const Checkin& r = checkins[m];
    event.participants.insert(r.user);
    times.push_back(r.time);
    lat += r.lat;
    lon += r.lon;
  }
  std::sort(times.begin(), times.end());
  const std::size_t n = times.size();
  // median; even counts round down the midpoint
  event.time = (n % 2 == 1) ? times[n / 2] : (times[n / 2 - 1] + times[n / 2]) / 2;
  event.lat = lat / static_cast<double>(n);
  event.lon = lon / static_cast<double>(n);
  return event;
}

}  // namespace

std::vector<Sste> detect_sstes(const CheckinSequence& checkins,
                               const FriendshipGraph& graph,
                               const DetectionParams& params) {
  params.validate();
  const std::size_t n = checkins.size();
  std::vector<bool> claimed(n, false);
  std::vector<Sste> events;

  for (std::size_t seed = 0; seed < n; ++seed) {
    if (claimed[seed]) continue;
    const Checkin& sc = checkins[seed];

    // Greedy growth in time order: a check-in joins if it is pairwise
    // compatible with every current member. Members never precede the seed,
    // so candidates lie within epsilon_time of the seed's timestamp.
    std::vector<std::size_t> group{seed};
    for (std::size_t j = seed + 1; j < n; ++j) {
      if (static_cast<double>(checkins[j].time - sc.time) > params.epsilon_time) break;
      if (claimed[j]) continue;
      bool ok = true;
      for (std::size_t m : group) {
        if (!compatible(checkins[j], checkins[m], params)) {
          ok = false;
          break;
        }
      }
      if (ok) group.push_back(j);
    }

    std::set<PersonId> users;
    for (std::size_t m : group) users.insert(checkins[m].user);
    const std::set<PersonId> comp = reachable_users(graph, users, sc.user);

    std::vector<std::size_t> kept;
    std::set<PersonId> kept_users;
    for (std::size_t m : group) {
      if (comp.count(checkins[m].user) != 0) {
        kept.push_back(m);
        kept_users.insert(checkins[m].user);
      }
    }
    if (static_cast<int>(kept_users.size()) < params.min_participants) continue;

    for (std::size_t m : kept) claimed[m] = true;
    events.push_back(summarize(checkins, std::move(kept)));
  }
  return events;
}

EventSequence event_sequence(const std::vector<Sste>& events, const PersonId& u) {
  EventSequence seq;
  seq.user = u;
  std::vector<std::size_t> order(events.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return events[a].time < events[b].time;
  });
  for (std::size_t i : order) {
    if (events[i].participants.count(u) != 0) seq.events.push_back(i);
  }
  return seq;
}

IntervalSeries interval_series(const std::vector<Sste>& events, const EventSequence& seq) {
  if (seq.events.size() < 2) {
    throw InsufficientHistory("user '" + seq.user + "' has " +
                              std::to_string(seq.events.size()) +
                              " events; at least 2 required for intervals");
  }
  IntervalSeries series;
  series.user = seq.user;
  series.values.reserve(seq.events.size() - 1);
  for (std::size_t i = 0; i + 1 < seq.events.size(); ++i) {
    const double dt = static_cast<double>(events[seq.events[i + 1]].time -
                                          events[seq.events[i]].time);
    if (!(dt > 0.0)) {
      throw std::logic_error("non-increasing event times for user '" + seq.user + "'");
    }
    series.values.push_back(dt);
  }
  return series;
}

double decayed_weight(const Checkin& r, EpochSeconds now, double half_life) {
  if (now < r.time) {
    throw NumericError("decayed_weight: check-in at " + std::to_string(r.time) +
                       " is after reference time " + std::to_string(now));
  }
  if (!(half_life > 0.0)) throw std::invalid_argument("half_life must be > 0");
  const double age = static_cast<double>(now - r.time);
  return std::exp2(-age / half_life);
}

void write_events_jsonl(const std::vector<Sste>& events, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ParseError("cannot write file: " + path.string());
  for (std::size_t i = 0; i < events.size(); ++i) {
    const Sste& e = events[i];
    nlohmann::json j;
    j["event_id"] = i;
    j["time"] = e.time;
    j["lat"] = e.lat;
    j["lon"] = e.lon;
    j["participants"] = std::vector<PersonId>(e.participants.begin(), e.participants.end());
    j["checkin_ids"] = e.member_checkins;
    out << j.dump() << '\n';
  }
}

std::vector<Sste> read_events_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path.string());
  std::vector<Sste> events;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    Sste e;
    e.time = j.at("time").get<EpochSeconds>();
    e.lat = j.at("lat").get<double>();
    e.lon = j.at("lon").get<double>();
    for (const auto& p : j.at("participants")) e.participants.insert(p.get<PersonId>());
    for (const auto& c : j.at("checkin_ids")) e.member_checkins.push_back(c.get<std::size_t>());
    events.push_back(std::move(e));
  }
  return events;
}

}  // namespace sste
