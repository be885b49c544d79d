#include "mcprioq/io.hpp"

#include <charconv>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string_view>
#include <unordered_set>
#include <utility>

#include "mcprioq/errors.hpp"

namespace mcprioq {
namespace {

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t") == std::string_view::npos;
}

TransitionRecord parse_transition(std::string_view line, std::uint64_t number) {
  const auto comma = line.find(',');
  if (comma == std::string_view::npos) {
    throw FormatError(number, "expected 'src,dst'");
  }
  if (line.find(',', comma + 1) != std::string_view::npos) {
    throw FormatError(number, "extra field; expected 'src,dst'");
  }
  const std::string_view src = line.substr(0, comma);
  const std::string_view dst = line.substr(comma + 1);
  for (const std::string_view id : {src, dst}) {
    if (auto why = NodeId::validate(id)) throw FormatError(number, *why);
  }
  return {NodeId(src), NodeId(dst)};
}

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto space = line.find(' ', start);
    fields.push_back(line.substr(start, space - start));
    if (space == std::string_view::npos) break;
    start = space + 1;
  }
  return fields;
}

std::uint64_t parse_count(std::string_view text, std::uint64_t line,
                          const char* what) {
  std::uint64_t value = 0;
  const bool canonical = !text.empty() && (text.size() == 1 || text[0] != '0');
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (!canonical || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw FormatError(line, std::string("invalid ") + what + " '" +
                                std::string(text) + "'");
  }
  return value;
}

NodeId parse_id(std::string_view text, std::uint64_t line) {
  if (auto why = NodeId::validate(text)) throw FormatError(line, *why);
  return NodeId(text);
}

}  // namespace

ParseStats for_each_transition(
    std::istream& in, const ParseOptions& options,
    const std::function<void(const TransitionRecord&)>& sink) {
  ParseStats stats;
  std::string line;
  while (std::getline(in, line)) {
    ++stats.lines;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line) || line.front() == '#') continue;
    std::optional<TransitionRecord> record;
    try {
      record.emplace(parse_transition(line, stats.lines));
    } catch (const FormatError&) {
      if (!options.lenient) throw;
      ++stats.skipped;
      continue;
    }
    ++stats.records;
    sink(*record);
  }
  if (in.bad()) throw std::ios_base::failure("read error in transition stream");
  return stats;
}

std::vector<TransitionRecord> parse_stream(std::istream& in,
                                           const ParseOptions& options,
                                           ParseStats* stats) {
  std::vector<TransitionRecord> records;
  const ParseStats s = for_each_transition(
      in, options, [&](const TransitionRecord& r) { records.push_back(r); });
  if (stats != nullptr) *stats = s;
  return records;
}

void write_snapshot(const Graph& graph, std::ostream& out) {
  const GraphImage image = graph.image();
  out << "MCPRIOQ " << kSnapshotVersion << '\n';
  for (const SourceImage& s : image) {
    std::uint64_t sum = 0;
    std::uint64_t previous = std::numeric_limits<std::uint64_t>::max();
    for (const auto& [dst, count] : s.edges) {
      if (count > previous || count == 0) {
        throw InvariantError("queue of " + s.src +
                             " is not sorted; run stabilize_all first");
      }
      previous = count;
      sum += count;
    }
    if (sum != s.total) {
      throw InvariantError("total of " + s.src + " does not match its edges");
    }
    out << "S " << s.src << ' ' << s.total << ' ' << s.edges.size() << '\n';
    for (const auto& [dst, count] : s.edges) {
      out << "E " << dst << ' ' << count << '\n';
    }
  }
  out.flush();
  if (!out) throw std::ios_base::failure("failed to write snapshot");
}

std::string snapshot_string(const Graph& graph) {
  std::ostringstream out;
  write_snapshot(graph, out);
  return out.str();
}

std::unique_ptr<Graph> read_snapshot(std::istream& in, DecayConfig config) {
  auto graph = std::make_unique<Graph>(std::move(config));
  std::string line;
  std::uint64_t number = 0;

  if (!std::getline(in, line)) throw FormatError(1, "missing snapshot header");
  ++number;
  {
    const auto fields = split_spaces(line);
    if (fields.size() != 2 || fields[0] != "MCPRIOQ") {
      throw FormatError(number, "expected header 'MCPRIOQ " +
                                    std::to_string(kSnapshotVersion) + "'");
    }
    if (parse_count(fields[1], number, "version") != kSnapshotVersion) {
      throw FormatError(number, "unsupported snapshot version " +
                                    std::string(fields[1]));
    }
  }

  std::unordered_set<std::string> sources;
  std::vector<std::pair<NodeId, std::uint64_t>> edges;
  while (std::getline(in, line)) {
    ++number;
    const std::uint64_t source_line = number;
    const auto fields = split_spaces(line);
    if (fields.size() != 4 || fields[0] != "S") {
      throw FormatError(number, "expected 'S <src> <total> <edge_count>'");
    }
    NodeId src = parse_id(fields[1], number);
    const std::uint64_t total = parse_count(fields[2], number, "total");
    const std::uint64_t edge_count = parse_count(fields[3], number, "edge count");
    if (edge_count == 0) throw FormatError(number, "source without edges");
    if (!sources.insert(src.str()).second) {
      throw FormatError(number, "duplicate source " + src.str());
    }

    edges.clear();
    std::unordered_set<std::string> dsts;
    std::uint64_t sum = 0;
    for (std::uint64_t i = 0; i < edge_count; ++i) {
      if (!std::getline(in, line)) {
        throw FormatError(number + 1, "snapshot truncated inside source " +
                                          src.str());
      }
      ++number;
      const auto edge = split_spaces(line);
      if (edge.size() != 3 || edge[0] != "E") {
        throw FormatError(number, "expected 'E <dst> <count>'");
      }
      NodeId dst = parse_id(edge[1], number);
      const std::uint64_t count = parse_count(edge[2], number, "count");
      if (count == 0) throw FormatError(number, "zero edge count");
      if (!edges.empty() && count > edges.back().second) {
        throw FormatError(number, "order violation: counts increase along "
                                  "the queue of " + src.str());
      }
      if (!dsts.insert(dst.str()).second) {
        throw FormatError(number, "duplicate destination " + dst.str());
      }
      if (sum > std::numeric_limits<std::uint64_t>::max() - count) {
        throw FormatError(number, "total overflows");
      }
      sum += count;
      edges.emplace_back(std::move(dst), count);
    }
    if (sum != total) {
      throw FormatError(source_line, "total " + std::to_string(total) +
                                         " != sum of edge counts " +
                                         std::to_string(sum));
    }
    graph->restore_source(src, total, edges);
  }
  if (in.bad()) throw std::ios_base::failure("read error in snapshot");
  return graph;
}

std::unique_ptr<Graph> snapshot_from_string(const std::string& text,
                                            DecayConfig config) {
  std::istringstream in(text);
  return read_snapshot(in, std::move(config));
}

}  // namespace mcprioq
