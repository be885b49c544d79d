#ifndef MCPRIOQ_NODE_ID_HPP_
#define MCPRIOQ_NODE_ID_HPP_

#include <compare>
#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

namespace mcprioq {

/// Identifier of a graph vertex: non-empty UTF-8 without whitespace, commas
/// or control characters. Equality and ordering are byte-wise.
class NodeId {
 public:
  /// Throws InputError when `text` is not a valid identifier.
  explicit NodeId(std::string_view text);

  /// Returns the reason `text` is invalid, or nullopt when it is valid.
  static std::optional<std::string> validate(std::string_view text);
  static bool is_valid(std::string_view text) { return !validate(text); }

  const std::string& str() const noexcept { return value_; }
  std::string_view view() const noexcept { return value_; }

  friend bool operator==(const NodeId&, const NodeId&) = default;
  friend std::strong_ordering operator<=>(const NodeId& a, const NodeId& b) {
    return a.value_.compare(b.value_) <=> 0;
  }

 private:
  std::string value_;
};

inline std::ostream& operator<<(std::ostream& os, const NodeId& id) {
  return os << id.str();
}

struct NodeIdHash {
  std::size_t operator()(const NodeId& id) const noexcept {
    return std::hash<std::string_view>{}(id.view());
  }
};

}  // namespace mcprioq

#endif  // MCPRIOQ_NODE_ID_HPP_
