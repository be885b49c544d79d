#include "mcprioq/oracle.hpp"

#include <algorithm>
#include <sstream>

#include "mcprioq/errors.hpp"

namespace mcprioq {

void OracleGraph::record(const std::string& src, const std::string& dst) {
  Source& s = sources_[src];
  auto it = std::find_if(s.edges.begin(), s.edges.end(),
                         [&](const auto& e) { return e.first == dst; });
  std::size_t pos;
  if (it == s.edges.end()) {
    s.edges.emplace_back(dst, 1);
    pos = s.edges.size() - 1;
  } else {
    ++it->second;
    pos = static_cast<std::size_t>(it - s.edges.begin());
  }
  ++s.total;
  while (pos > 0 && s.edges[pos - 1].second < s.edges[pos].second) {
    std::swap(s.edges[pos - 1], s.edges[pos]);
    --pos;
  }
}

const OracleGraph::Source* OracleGraph::find(const std::string& src) const {
  auto it = sources_.find(src);
  return it == sources_.end() ? nullptr : &it->second;
}

Recommendation OracleGraph::recommend_top_n(const std::string& src,
                                            std::size_t n) const {
  Recommendation rec;
  const Source* s = find(src);
  if (s == nullptr) return rec;
  rec.found = true;
  for (const auto& [dst, count] : s->edges) {
    if (rec.items.size() >= n) break;
    const double p = static_cast<double>(count) / static_cast<double>(s->total);
    rec.items.push_back({dst, p});
    rec.cumulative += p;
  }
  return rec;
}

Recommendation OracleGraph::recommend_cumulative(const std::string& src,
                                                 double threshold) const {
  validate_threshold(threshold);
  Recommendation rec;
  const Source* s = find(src);
  if (s == nullptr) return rec;
  rec.found = true;
  for (const auto& [dst, count] : s->edges) {
    if (rec.cumulative >= threshold) break;
    const double p = static_cast<double>(count) / static_cast<double>(s->total);
    rec.items.push_back({dst, p});
    rec.cumulative += p;
  }
  return rec;
}

DecayResult OracleGraph::decay(const Rational& factor) {
  if (factor.numerator() == 0 || factor.numerator() > factor.denominator()) {
    throw InputError("decay factor must be in (0, 1]");
  }
  DecayResult result;
  for (auto& [src, s] : sources_) {
    const bool had_edges = !s.edges.empty();
    std::vector<std::pair<std::string, std::uint64_t>> kept;
    std::uint64_t total = 0;
    for (auto& [dst, count] : s.edges) {
      const auto scaled = static_cast<std::uint64_t>(
          static_cast<unsigned __int128>(count) * factor.numerator() /
          factor.denominator());
      if (scaled == 0) {
        ++result.edges_removed;
      } else {
        kept.emplace_back(dst, scaled);
        total += scaled;
      }
    }
    s.edges = std::move(kept);
    s.total = total;
    if (had_edges && s.edges.empty()) ++result.sources_emptied;
  }
  return result;
}

std::string OracleGraph::snapshot_text() const {
  std::ostringstream out;
  out << "MCPRIOQ 1\n";
  for (const auto& [src, s] : sources_) {
    if (s.edges.empty()) continue;
    out << "S " << src << ' ' << s.total << ' ' << s.edges.size() << '\n';
    for (const auto& [dst, count] : s.edges) {
      out << "E " << dst << ' ' << count << '\n';
    }
  }
  return out.str();
}

}  // namespace mcprioq
