#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tassim/schedule.hpp"
#include "tassim/types.hpp"

namespace tassim {

// Default table sizes of the modeled hardware.
inline constexpr std::size_t kTgclCapacity = 39'000;
inline constexpr std::size_t kSgclCapacity = 6'000;
inline constexpr std::size_t kStreamTableCapacity = 8'196;
inline constexpr int kDefaultKeyWidth = 48;

struct TcamError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CapacityError : std::runtime_error {
  CapacityError(const std::string& table, std::size_t excess)
      : std::runtime_error(table + " table capacity exceeded by " + std::to_string(excess) +
                           " entries"),
        table_name(table),
        excess(excess) {}
  std::string table_name;
  std::size_t excess;
};

/// A w-bit prefix: `mask` has 1-bits on exact-match positions, wildcard bits
/// are zero in `value`.
struct Prefix {
  std::uint64_t value = 0;
  std::uint64_t mask = 0;
  bool operator==(const Prefix&) const = default;
};

enum class TernaryAction : std::uint8_t { Open, Close, Pass, Drop };

inline const char* to_string(TernaryAction a) {
  switch (a) {
    case TernaryAction::Open: return "open";
    case TernaryAction::Close: return "close";
    case TernaryAction::Pass: return "pass";
    case TernaryAction::Drop: return "drop";
  }
  return "?";
}

inline constexpr std::uint32_t kWildcard = 0xffffffffu;

struct TernaryEntry {
  std::uint64_t value = 0;
  std::uint64_t mask = 0;
  std::uint32_t port = kWildcard;     // exact or wildcard
  std::uint32_t queue = kWildcard;    // 0..7 or wildcard
  std::uint32_t gate_id = kWildcard;  // stream gate identifier or wildcard
  TernaryAction action = TernaryAction::Close;
  std::uint32_t priority_order = 0;  // lower = matched first
};

struct TernaryKey {
  std::uint64_t timestamp = 0;
  std::uint32_t port = 0;
  std::uint32_t queue = 0;
  std::uint32_t gate_id = 0;
};

class MatTable {
 public:
  MatTable() = default;
  MatTable(std::string name, std::size_t capacity, int key_width)
      : name_(std::move(name)), capacity_(capacity), key_width_(key_width) {}

  void add(TernaryEntry entry);

  /// First-match semantics: lowest priority_order entry whose masked value and
  /// exact fields all match. Compiled GCL tables are non-overlapping, so a
  /// per-(port,queue)/(gate) interval index answers lookups in O(log n); the
  /// index is built lazily and gives the same result as the linear scan.
  std::optional<TernaryEntry> match(const TernaryKey& key) const;
  std::optional<TernaryEntry> match_linear(const TernaryKey& key) const;

  const std::vector<TernaryEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  int key_width() const { return key_width_; }
  const std::string& name() const { return name_; }

  void freeze();  // builds the lookup index

 private:
  struct IndexedRange {
    std::uint64_t lo, hi;
    std::uint32_t entry_index;
  };

  std::string name_ = "mat";
  std::size_t capacity_ = kTgclCapacity;
  int key_width_ = kDefaultKeyWidth;
  std::vector<TernaryEntry> entries_;
  bool frozen_ = false;
  bool indexable_ = false;
  // Side fields the whole table wildcards (must be uniform to index).
  bool wild_port_ = false, wild_queue_ = false, wild_gate_ = false;
  // key: (port, queue, gate) packed; each bucket sorted by range start
  std::vector<std::pair<std::uint64_t, std::vector<IndexedRange>>> buckets_;

  static std::uint64_t bucket_key(std::uint32_t port, std::uint32_t queue, std::uint32_t gate) {
    return (static_cast<std::uint64_t>(port) << 40) | (static_cast<std::uint64_t>(queue) << 32) |
           gate;
  }
};

/// Greedy range-to-ternary conversion: repeatedly take the largest aligned
/// prefix starting at the current lower bound that stays within [lo, hi].
/// Emits at most 2w-2 prefixes; for the consecutive non-overlapping ranges of
/// a GCL the decomposition is minimal and unique.
std::vector<Prefix> range_to_prefixes(std::uint64_t lo, std::uint64_t hi, int width);

struct CapacityResult {
  bool ok = true;
  std::size_t excess = 0;
};

CapacityResult capacity_check(const MatTable& table);

/// Compiles a transmission GCL: for every entry and every queue, the entry's
/// [start, start+duration) interval becomes prefixes keyed on (port, queue),
/// with an open or close action. Closed queues get explicit close rows so
/// every (time, queue) key is covered.
MatTable compile_tgcl(const Gcl& gcl, int width = kDefaultKeyWidth,
                      std::size_t capacity = kTgclCapacity);

/// Compiles a stream GCL: one prefix set per entry keyed on the gate id, with
/// pass/drop actions.
MatTable compile_sgcl(const Gcl& gcl, int width = kDefaultKeyWidth,
                      std::size_t capacity = kSgclCapacity);

std::optional<TernaryEntry> ternary_match(const MatTable& table, const TernaryKey& key);

/// CSV export: value(hex), mask(hex), port, queue/gate, action, one row per
/// entry, then a summary line with count, capacity and the 2w-2 worst-case
/// bound for the compiled GCL.
std::string mat_to_csv(const MatTable& table, std::size_t gcl_entries = 0, bool tgcl = true);

}  // namespace tassim
