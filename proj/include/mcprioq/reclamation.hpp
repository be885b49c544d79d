#ifndef MCPRIOQ_RECLAMATION_HPP_
#define MCPRIOQ_RECLAMATION_HPP_

/// \file
/// Epoch-based deferred reclamation.
///
/// Readers bracket every traversal of shared links with a ReadGuard. Writers
/// that unlink an object hand it to retire(); it is destroyed only once every
/// guard that might still observe it has been released. A single domain is
/// shared by all index tables and edge queues of one graph, so one guard
/// covers a lookup in the source table, the destination table and the walk
/// along the edge queue.
///
/// The global epoch advances from E to E+1 only when every active reader has
/// announced E. An object retired while the epoch read E is therefore safe to
/// destroy once the epoch reaches E+2.
///
/// Entering and leaving a read section are wait-free after a thread's first
/// use of a domain (which registers the thread under a mutex). Blocking
/// inside a read section stalls reclamation; it never deadlocks readers, but
/// quiesce() waits for it.

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <vector>

namespace mcprioq {

class ReclamationDomain;

namespace detail {

struct ThreadRecord {
  // (epoch << 1) | 1 while the owning thread is inside a read section, else 0.
  std::atomic<std::uint64_t> announced{0};
  std::atomic<bool> in_use{false};
  std::atomic<bool> orphaned{false};
  // Touched only by the owning thread.
  std::uint32_t depth = 0;
};

}  // namespace detail

/// Pins the calling thread's epoch for as long as it is live. Guards nest on
/// one thread and must be released in LIFO order on the thread that created
/// them.
class ReadGuard {
 public:
  ReadGuard(ReadGuard&& other) noexcept
      : record_(other.record_), epoch_(other.epoch_) {
    other.record_ = nullptr;
  }
  ReadGuard& operator=(ReadGuard&&) = delete;
  ReadGuard(const ReadGuard&) = delete;
  ReadGuard& operator=(const ReadGuard&) = delete;
  ~ReadGuard() {
    if (record_ != nullptr) release();
  }

  /// Ends the read section early. Releasing twice is a programming error.
  void release();

  bool live() const noexcept { return record_ != nullptr; }
  std::uint64_t entry_epoch() const noexcept { return epoch_; }

 private:
  friend class ReclamationDomain;
  ReadGuard(detail::ThreadRecord* record, std::uint64_t epoch) noexcept
      : record_(record), epoch_(epoch) {}

  detail::ThreadRecord* record_;
  std::uint64_t epoch_;
};

class ReclamationDomain {
 public:
  using Deleter = void (*)(void*);

  static constexpr std::size_t kDefaultAdvanceInterval = 64;

  /// `advance_interval` is the number of retirements between attempts to
  /// advance the epoch and destroy eligible objects.
  explicit ReclamationDomain(
      std::size_t advance_interval = kDefaultAdvanceInterval);
  /// Destroys every outstanding retired object. No guard may be live.
  ~ReclamationDomain();

  ReclamationDomain(const ReclamationDomain&) = delete;
  ReclamationDomain& operator=(const ReclamationDomain&) = delete;

  [[nodiscard]] ReadGuard enter_read();

  /// Queues `object` for destruction after the current grace period. The
  /// object must already be unreachable from the shared structure.
  void retire(void* object, Deleter deleter);

  template <typename T>
  void retire(T* object) {
    retire(static_cast<void*>(object),
           [](void* p) { delete static_cast<T*>(p); });
  }

  /// Blocks until every object retired before the call has been destroyed.
  /// The calling thread must not be inside a read section.
  void quiesce();

  /// Destroys whatever is already eligible without waiting. Returns the
  /// number of objects destroyed.
  std::size_t collect();

  std::uint64_t epoch() const noexcept {
    return global_epoch_.load(std::memory_order_seq_cst);
  }
  std::size_t pending() const;
  std::uint64_t destroyed() const noexcept {
    return destroyed_.load(std::memory_order_relaxed);
  }
  /// True when the calling thread holds a live guard on this domain.
  bool in_read_section() const;

 private:
  struct Retired {
    void* object;
    Deleter deleter;
    std::uint64_t epoch;
  };

  detail::ThreadRecord* local_record();
  std::shared_ptr<detail::ThreadRecord> register_thread();
  bool try_advance();

  const std::uint64_t id_;
  const std::size_t advance_interval_;
  alignas(64) std::atomic<std::uint64_t> global_epoch_{1};
  std::atomic<std::uint64_t> destroyed_{0};

  mutable std::mutex records_mutex_;
  std::vector<std::shared_ptr<detail::ThreadRecord>> records_;

  mutable std::mutex retired_mutex_;
  std::vector<Retired> retired_;
  std::uint64_t retire_count_ = 0;
};

}  // namespace mcprioq

#endif  // MCPRIOQ_RECLAMATION_HPP_
