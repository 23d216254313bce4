#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace oscta {

// Address of one cell of a named memory block (IR leakage payload).
struct MemAddr {
  std::string block;
  long long offset = 0;

  friend bool operator==(const MemAddr&, const MemAddr&) = default;
  friend auto operator<=>(const MemAddr&, const MemAddr&) = default;
};

using LeakScalar = std::variant<long long, MemAddr>;

// One observable action of the labeled semantics:
//   b(v)  branch condition value        (While if/while)
//   r(..) read indexes / read address   (While assignments, IR load)
//   w(v)  written index / address       (While array store, IR store)
//   j(d)  jump direction                (IR cond)
struct LeakEvent {
  enum class Kind { Branch, Read, Write, Jump };

  Kind kind = Kind::Read;
  std::vector<LeakScalar> values;

  static LeakEvent branch(long long v) { return {Kind::Branch, {v}}; }
  static LeakEvent read(std::vector<LeakScalar> vs) { return {Kind::Read, std::move(vs)}; }
  static LeakEvent write(LeakScalar v) { return {Kind::Write, {std::move(v)}}; }
  static LeakEvent jump(long long d) { return {Kind::Jump, {d}}; }

  friend bool operator==(const LeakEvent&, const LeakEvent&) = default;
};

// Traces compare element-wise; two executions are identical iff their traces are equal.
using LeakTrace = std::vector<LeakEvent>;

std::string render(const LeakScalar& s);
std::string render(const LeakEvent& e);
std::string render(const LeakTrace& t);

}  // namespace oscta
