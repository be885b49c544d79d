#include "mcprioq/reclamation.hpp"

#include <algorithm>
#include <cassert>
#include <thread>
#include <utility>

namespace mcprioq {
namespace {

std::atomic<std::uint64_t> next_domain_id{1};

struct CachedRecord {
  std::uint64_t domain_id;
  std::shared_ptr<detail::ThreadRecord> record;
};

// Per-thread list of the records this thread owns, one per domain. Records
// are shared with the domain so that either side may go away first.
struct ThreadCache {
  std::vector<CachedRecord> entries;

  ~ThreadCache() {
    for (auto& entry : entries) {
      assert(entry.record->depth == 0 && "thread exited inside a read section");
      entry.record->in_use.store(false, std::memory_order_release);
    }
  }

  detail::ThreadRecord* find(std::uint64_t domain_id) {
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (entries[i].domain_id == domain_id) {
        if (i != 0) std::swap(entries[0], entries[i]);
        return entries[0].record.get();
      }
    }
    return nullptr;
  }

  void add(std::uint64_t domain_id,
           std::shared_ptr<detail::ThreadRecord> record) {
    std::erase_if(entries, [](const CachedRecord& e) {
      return e.record->orphaned.load(std::memory_order_acquire);
    });
    entries.insert(entries.begin(), {domain_id, std::move(record)});
  }
};

thread_local ThreadCache thread_cache;

}  // namespace

void ReadGuard::release() {
  assert(record_ != nullptr && "read guard released twice");
  assert(record_->depth > 0 && "unbalanced read section exit");
  if (--record_->depth == 0) {
    record_->announced.store(0, std::memory_order_seq_cst);
  }
  record_ = nullptr;
}

ReclamationDomain::ReclamationDomain(std::size_t advance_interval)
    : id_(next_domain_id.fetch_add(1, std::memory_order_relaxed)),
      advance_interval_(std::max<std::size_t>(advance_interval, 1)) {}

ReclamationDomain::~ReclamationDomain() {
  {
    std::lock_guard lock(records_mutex_);
    for (auto& record : records_) {
      assert(record->announced.load() == 0 &&
             "domain destroyed with a live read guard");
      record->orphaned.store(true, std::memory_order_release);
    }
  }
  for (const Retired& r : retired_) r.deleter(r.object);
}

detail::ThreadRecord* ReclamationDomain::local_record() {
  if (auto* record = thread_cache.find(id_)) return record;
  auto record = register_thread();
  auto* raw = record.get();
  thread_cache.add(id_, std::move(record));
  return raw;
}

std::shared_ptr<detail::ThreadRecord> ReclamationDomain::register_thread() {
  std::lock_guard lock(records_mutex_);
  for (auto& record : records_) {
    bool expected = false;
    if (record->in_use.compare_exchange_strong(expected, true,
                                               std::memory_order_acq_rel)) {
      record->depth = 0;
      return record;
    }
  }
  auto record = std::make_shared<detail::ThreadRecord>();
  record->in_use.store(true, std::memory_order_relaxed);
  records_.push_back(record);
  return record;
}

ReadGuard ReclamationDomain::enter_read() {
  detail::ThreadRecord* record = local_record();
  if (record->depth++ == 0) {
    const std::uint64_t epoch = global_epoch_.load(std::memory_order_seq_cst);
    record->announced.store((epoch << 1) | 1, std::memory_order_seq_cst);
    return ReadGuard(record, epoch);
  }
  return ReadGuard(record, record->announced.load(std::memory_order_relaxed) >> 1);
}

bool ReclamationDomain::in_read_section() const {
  for (const auto& entry : thread_cache.entries) {
    if (entry.domain_id == id_) return entry.record->depth > 0;
  }
  return false;
}

void ReclamationDomain::retire(void* object, Deleter deleter) {
  bool advance = false;
  {
    std::lock_guard lock(retired_mutex_);
    retired_.push_back(
        {object, deleter, global_epoch_.load(std::memory_order_seq_cst)});
    advance = ++retire_count_ % advance_interval_ == 0;
  }
  if (advance) {
    try_advance();
    collect();
  }
}

bool ReclamationDomain::try_advance() {
  std::uint64_t epoch = global_epoch_.load(std::memory_order_seq_cst);
  {
    std::lock_guard lock(records_mutex_);
    for (const auto& record : records_) {
      const std::uint64_t announced =
          record->announced.load(std::memory_order_seq_cst);
      if ((announced & 1) != 0 && (announced >> 1) != epoch) return false;
    }
  }
  return global_epoch_.compare_exchange_strong(epoch, epoch + 1,
                                               std::memory_order_seq_cst);
}

std::size_t ReclamationDomain::collect() {
  const std::uint64_t epoch = global_epoch_.load(std::memory_order_seq_cst);
  std::vector<Retired> ready;
  {
    // Entries are appended under the lock with non-decreasing epochs.
    std::lock_guard lock(retired_mutex_);
    auto split = std::partition_point(
        retired_.begin(), retired_.end(),
        [epoch](const Retired& r) { return r.epoch + 2 <= epoch; });
    ready.assign(retired_.begin(), split);
    retired_.erase(retired_.begin(), split);
  }
  for (const Retired& r : ready) r.deleter(r.object);
  destroyed_.fetch_add(ready.size(), std::memory_order_relaxed);
  return ready.size();
}

void ReclamationDomain::quiesce() {
  assert(!in_read_section() && "quiesce() called inside a read section");
  const std::uint64_t target = global_epoch_.load(std::memory_order_seq_cst) + 2;
  while (global_epoch_.load(std::memory_order_seq_cst) < target) {
    if (!try_advance()) std::this_thread::yield();
  }
  collect();
}

std::size_t ReclamationDomain::pending() const {
  std::lock_guard lock(retired_mutex_);
  return retired_.size();
}

}  // namespace mcprioq
