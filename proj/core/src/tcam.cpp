#include "tassim/tcam.hpp"

#include <algorithm>
#include <bit>
#include <sstream>

namespace tassim {

namespace {

constexpr std::uint64_t domain_mask(int width) {
  return width >= 64 ? ~0ull : ((1ull << width) - 1);
}

}  // namespace

std::vector<Prefix> range_to_prefixes(std::uint64_t lo, std::uint64_t hi, int width) {
  if (width < 1 || width > kTimestampBits)
    throw TcamError("key width " + std::to_string(width) + " out of range");
  const std::uint64_t dom = domain_mask(width);
  if (lo > hi) throw TcamError("range lower bound exceeds upper bound");
  if (hi > dom) throw TcamError("range exceeds 2^" + std::to_string(width) + " domain");

  std::vector<Prefix> out;
  std::uint64_t cur = lo;
  for (;;) {
    // Largest block: limited by the alignment of cur and by the remaining span.
    int align = cur == 0 ? width : std::countr_zero(cur);
    if (align > width) align = width;
    const std::uint64_t remaining = hi - cur + 1;
    const int span = 63 - std::countl_zero(remaining);  // floor(log2(remaining))
    const int block_bits = std::min(align, span);
    const std::uint64_t block = 1ull << block_bits;

    Prefix p;
    p.value = cur;
    p.mask = dom & ~(block - 1);
    out.push_back(p);

    if (hi - cur < block) break;  // covered through hi
    cur += block;
    if (cur > hi) break;
  }
  return out;
}

void MatTable::add(TernaryEntry entry) {
  if (entries_.size() >= capacity_)
    throw CapacityError(name_, entries_.size() + 1 - capacity_);
  entry.priority_order = static_cast<std::uint32_t>(entries_.size());
  entries_.push_back(entry);
  frozen_ = false;
}

void MatTable::freeze() {
  buckets_.clear();
  indexable_ = !entries_.empty();
  if (indexable_) {
    // A side field is indexable when the whole table treats it uniformly:
    // either every entry wildcards it or none does.
    wild_port_ = entries_.front().port == kWildcard;
    wild_queue_ = entries_.front().queue == kWildcard;
    wild_gate_ = entries_.front().gate_id == kWildcard;
    for (const TernaryEntry& e : entries_) {
      if ((e.port == kWildcard) != wild_port_ || (e.queue == kWildcard) != wild_queue_ ||
          (e.gate_id == kWildcard) != wild_gate_) {
        indexable_ = false;
        break;
      }
    }
  }
  for (std::uint32_t i = 0; indexable_ && i < entries_.size(); ++i) {
    const TernaryEntry& e = entries_[i];
    // The index only handles contiguous prefix rows.
    const std::uint64_t wild = ~e.mask & domain_mask(key_width_);
    if ((wild & (wild + 1)) != 0 || (e.value & wild) != 0) {
      indexable_ = false;
      break;
    }
    const std::uint64_t key = bucket_key(e.port, e.queue, e.gate_id);
    auto it = std::find_if(buckets_.begin(), buckets_.end(),
                           [&](const auto& b) { return b.first == key; });
    if (it == buckets_.end()) {
      buckets_.push_back({key, {}});
      it = buckets_.end() - 1;
    }
    it->second.push_back({e.value, e.value | wild, i});
  }
  if (indexable_) {
    for (auto& [key, ranges] : buckets_) {
      std::sort(ranges.begin(), ranges.end(),
                [](const IndexedRange& a, const IndexedRange& b) { return a.lo < b.lo; });
      for (std::size_t i = 1; i < ranges.size(); ++i) {
        if (ranges[i].lo <= ranges[i - 1].hi) {
          indexable_ = false;  // overlapping rows: first-match order matters
          break;
        }
      }
      if (!indexable_) break;
    }
  }
  frozen_ = true;
}

std::optional<TernaryEntry> MatTable::match_linear(const TernaryKey& key) const {
  const TernaryEntry* best = nullptr;
  for (const TernaryEntry& e : entries_) {
    if ((key.timestamp & e.mask) != e.value) continue;
    if (e.port != kWildcard && e.port != key.port) continue;
    if (e.queue != kWildcard && e.queue != key.queue) continue;
    if (e.gate_id != kWildcard && e.gate_id != key.gate_id) continue;
    if (!best || e.priority_order < best->priority_order) best = &e;
  }
  if (!best) return std::nullopt;
  return *best;
}

std::optional<TernaryEntry> MatTable::match(const TernaryKey& key) const {
  if (!frozen_ || !indexable_) return match_linear(key);
  const std::uint64_t bkey = bucket_key(wild_port_ ? kWildcard : key.port,
                                        wild_queue_ ? kWildcard : key.queue,
                                        wild_gate_ ? kWildcard : key.gate_id);
  for (const auto& [k, ranges] : buckets_) {
    if (k != bkey) continue;
    // last range with lo <= timestamp
    std::size_t lo = 0, hi = ranges.size();
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (ranges[mid].lo <= key.timestamp) lo = mid + 1; else hi = mid;
    }
    if (lo == 0) return std::nullopt;
    const IndexedRange& r = ranges[lo - 1];
    if (key.timestamp <= r.hi) return entries_[r.entry_index];
    return std::nullopt;
  }
  return std::nullopt;
}

CapacityResult capacity_check(const MatTable& table) {
  if (table.size() <= table.capacity()) return {true, 0};
  return {false, table.size() - table.capacity()};
}

MatTable compile_tgcl(const Gcl& gcl, int width, std::size_t capacity) {
  if (gcl.kind != GclKind::Transmission) throw TcamError("tGCL compile needs a transmission GCL");
  const ValidationReport report = validate_gcl(gcl);
  if (!report.valid()) throw TcamError("invalid GCL: " + report.violations.front());

  MatTable table("tGCL", capacity, width);
  Ns start = 0;
  for (const GclEntry& entry : gcl.entries) {
    const auto prefixes = range_to_prefixes(static_cast<std::uint64_t>(start),
                                            static_cast<std::uint64_t>(start + entry.duration_ns - 1),
                                            width);
    for (int q = 0; q < kNumQueues; ++q) {
      for (const Prefix& p : prefixes) {
        TernaryEntry row;
        row.value = p.value;
        row.mask = p.mask;
        row.port = gcl.port;
        row.queue = static_cast<std::uint32_t>(q);
        row.action = entry.gates.open(q) ? TernaryAction::Open : TernaryAction::Close;
        table.add(row);
      }
    }
    start += entry.duration_ns;
  }
  table.freeze();
  return table;
}

MatTable compile_sgcl(const Gcl& gcl, int width, std::size_t capacity) {
  if (gcl.kind != GclKind::Stream) throw TcamError("sGCL compile needs a stream GCL");
  const ValidationReport report = validate_gcl(gcl);
  if (!report.valid()) throw TcamError("invalid GCL: " + report.violations.front());

  MatTable table("sGCL", capacity, width);
  Ns start = 0;
  for (const GclEntry& entry : gcl.entries) {
    const auto prefixes = range_to_prefixes(static_cast<std::uint64_t>(start),
                                            static_cast<std::uint64_t>(start + entry.duration_ns - 1),
                                            width);
    for (const Prefix& p : prefixes) {
      TernaryEntry row;
      row.value = p.value;
      row.mask = p.mask;
      row.gate_id = gcl.gate_id;
      row.action = entry.stream_open ? TernaryAction::Pass : TernaryAction::Drop;
      table.add(row);
    }
    start += entry.duration_ns;
  }
  table.freeze();
  return table;
}

std::optional<TernaryEntry> ternary_match(const MatTable& table, const TernaryKey& key) {
  return table.match(key);
}

std::string mat_to_csv(const MatTable& table, std::size_t gcl_entries, bool tgcl) {
  std::ostringstream os;
  os << "value_hex,mask_hex,port,queue_or_gate,action\n";
  os << std::hex;
  for (const TernaryEntry& e : table.entries()) {
    os << "0x" << e.value << ",0x" << e.mask << "," << std::dec;
    if (e.port == kWildcard) os << "*"; else os << e.port;
    os << ",";
    const std::uint32_t qg = tgcl ? e.queue : e.gate_id;
    if (qg == kWildcard) os << "*"; else os << qg;
    os << "," << to_string(e.action) << "\n" << std::hex;
  }
  os << std::dec;
  const std::size_t per_entry = tgcl ? 8u : 1u;
  const std::size_t bound =
      gcl_entries * per_entry * static_cast<std::size_t>(2 * table.key_width() - 2);
  os << "# count=" << table.size() << " capacity=" << table.capacity();
  if (gcl_entries > 0) os << " worst_case_bound=" << bound;
  os << "\n";
  return os.str();
}

}  // namespace tassim
