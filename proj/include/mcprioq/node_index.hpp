#ifndef MCPRIOQ_NODE_INDEX_HPP_
#define MCPRIOQ_NODE_INDEX_HPP_

/// \file
/// Concurrent hash table with read-copy-update resizing.
///
/// Buckets are singly linked chains that only ever grow at the head by CAS,
/// so a reader walking a chain sees an immutable suffix. Growing the table
/// allocates a bucket array twice as large and publishes it with one atomic
/// store; its buckets start out "unmigrated". Each old bucket is then frozen
/// (tag bit on the head and on every value slot) and copied into the two new
/// buckets it splits into. Any thread that meets an unmigrated bucket helps
/// by performing that copy itself; copies are built from frozen, immutable
/// content so every helper produces the same result and only the first CAS
/// publishes. Once all buckets are copied the old array is retired through
/// the reclamation domain.
///
/// Keys are never removed. A key's value slot may be detached (set to null)
/// and later refilled by put_if_absent, which treats an empty slot as absent.

#include <atomic>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>

#include "mcprioq/reclamation.hpp"

namespace mcprioq {

/// Finalizer of a 64-bit mix; spreads pointer keys whose low bits are zero.
struct PointerHash {
  template <typename T>
  std::size_t operator()(const T* p) const noexcept {
    auto x = static_cast<std::uint64_t>(reinterpret_cast<std::uintptr_t>(p));
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    x *= 0xc4ceb9fe1a85ec53ULL;
    x ^= x >> 33;
    return static_cast<std::size_t>(x);
  }
};

template <typename Key, typename Value, typename Hash = std::hash<Key>>
class IndexTable {
 public:
  struct PutResult {
    bool inserted;
    Value* current;
  };

  static constexpr std::size_t kDefaultCapacity = 16;

  explicit IndexTable(ReclamationDomain& domain,
                      std::size_t initial_capacity = kDefaultCapacity)
      : domain_(domain),
        table_(new Buckets(round_up_pow2(initial_capacity), nullptr)) {}

  IndexTable(const IndexTable&) = delete;
  IndexTable& operator=(const IndexTable&) = delete;

  /// Owns and deletes every attached value. No concurrent users.
  ~IndexTable() {
    Buckets* buckets = table_.load(std::memory_order_acquire);
    assert(buckets->source.load() == nullptr);
    for (std::size_t i = 0; i <= buckets->mask; ++i) {
      Chain* c = chain_ptr(buckets->heads[i].load(std::memory_order_relaxed));
      while (c != nullptr) {
        Chain* next = c->next;
        delete value_ptr(c->value.load(std::memory_order_relaxed));
        delete c;
        c = next;
      }
    }
    delete buckets;
  }

  /// Value attached to `key`, or nullptr.
  Value* get(const ReadGuard& guard, const Key& key) const {
    assert(guard.live());
    (void)guard;
    const std::size_t hash = hasher_(key);
    const Buckets* buckets = table_.load(std::memory_order_acquire);
    for (;;) {
      const std::uintptr_t head =
          buckets->heads[hash & buckets->mask].load(std::memory_order_acquire);
      if (head == kUnmigrated) {
        // The old array still holds the complete bucket.
        if (const Buckets* source =
                buckets->source.load(std::memory_order_acquire)) {
          buckets = source;
        }
        continue;
      }
      if (const Chain* c = find(head, key)) {
        return value_ptr(c->value.load(std::memory_order_acquire));
      }
      return nullptr;
    }
  }

  /// Attaches `value` to `key` unless a value is already attached. Exactly
  /// one of several racing callers for the same key gets inserted == true;
  /// all of them get the same `current`. A rejected `value` is destroyed.
  PutResult put_if_absent(const ReadGuard& guard, const Key& key,
                          std::unique_ptr<Value> value) {
    assert(guard.live());
    (void)guard;
    const std::size_t hash = hasher_(key);
    std::unique_ptr<Chain> fresh;
    for (;;) {
      Buckets* buckets = table_.load(std::memory_order_acquire);
      const std::size_t index = hash & buckets->mask;
      auto& slot = buckets->heads[index];
      std::uintptr_t head = slot.load(std::memory_order_acquire);
      if (head == kUnmigrated) {
        migrate(buckets, index);
        continue;
      }
      if ((head & kFrozen) != 0) continue;  // a larger array is already live

      if (Chain* c = find(head, key)) {
        std::uintptr_t current = c->value.load(std::memory_order_acquire);
        while ((current & kFrozen) == 0) {
          if (current != 0) return {false, value_ptr(current)};
          if (c->value.compare_exchange_weak(current, bits(value.get()),
                                             std::memory_order_acq_rel)) {
            return {true, value.release()};
          }
        }
        continue;
      }

      if (!fresh) {
        fresh.reset(new Chain{key, bits(value.get()), nullptr});
      }
      fresh->next = chain_ptr(head);
      if (slot.compare_exchange_strong(head, bits(fresh.get()),
                                       std::memory_order_acq_rel)) {
        fresh.release();
        Value* inserted = value.release();
        const std::size_t count =
            count_.fetch_add(1, std::memory_order_relaxed) + 1;
        maybe_grow(count);
        return {true, inserted};
      }
    }
  }

  /// Clears the value slot of `key` if it still holds `expected`. The caller
  /// takes over ownership of `expected` (normally to retire it).
  bool detach(const ReadGuard& guard, const Key& key, Value* expected) {
    assert(guard.live());
    (void)guard;
    const std::size_t hash = hasher_(key);
    for (;;) {
      Buckets* buckets = table_.load(std::memory_order_acquire);
      const std::size_t index = hash & buckets->mask;
      const std::uintptr_t head =
          buckets->heads[index].load(std::memory_order_acquire);
      if (head == kUnmigrated) {
        migrate(buckets, index);
        continue;
      }
      if ((head & kFrozen) != 0) continue;
      Chain* c = find(head, key);
      if (c == nullptr) return false;
      std::uintptr_t current = bits(expected);
      if (c->value.compare_exchange_strong(current, 0,
                                           std::memory_order_acq_rel)) {
        return true;
      }
      if ((current & kFrozen) == 0) return false;
    }
  }

  /// Calls visit(key, value) once for every key whose value is attached for
  /// the whole call. Concurrent insertions may or may not be visited.
  template <typename Visitor>
  void iterate(const ReadGuard& guard, Visitor&& visit) const {
    assert(guard.live());
    (void)guard;
    const Buckets* buckets = table_.load(std::memory_order_acquire);
    for (std::size_t i = 0; i <= buckets->mask; ++i) {
      std::uintptr_t head = buckets->heads[i].load(std::memory_order_acquire);
      if (head == kUnmigrated) {
        if (const Buckets* source =
                buckets->source.load(std::memory_order_acquire)) {
          const std::uintptr_t old_head =
              source->heads[i & source->mask].load(std::memory_order_acquire);
          for (const Chain* c = chain_ptr(old_head); c != nullptr; c = c->next) {
            if ((hasher_(c->key) & buckets->mask) == i) visit_one(*c, visit);
          }
          continue;
        }
        head = buckets->heads[i].load(std::memory_order_acquire);
      }
      for (const Chain* c = chain_ptr(head); c != nullptr; c = c->next) {
        visit_one(*c, visit);
      }
    }
  }

  /// Doubles the bucket array now (the normal trigger is load factor 0.75).
  void grow(const ReadGuard& guard) {
    assert(guard.live());
    (void)guard;
    std::lock_guard lock(resize_mutex_);
    resize_locked(table_.load(std::memory_order_acquire));
  }

  /// Grows until `keys` keys fit below the load factor.
  void reserve(const ReadGuard& guard, std::size_t keys) {
    assert(guard.live());
    (void)guard;
    std::lock_guard lock(resize_mutex_);
    for (;;) {
      Buckets* buckets = table_.load(std::memory_order_acquire);
      if (keys * 4 <= (buckets->mask + 1) * 3) return;
      resize_locked(buckets);
    }
  }

  /// Number of keys, including keys whose value is detached.
  std::size_t size() const noexcept {
    return count_.load(std::memory_order_relaxed);
  }
  std::size_t bucket_count() const noexcept {
    return table_.load(std::memory_order_acquire)->mask + 1;
  }

 private:
  static constexpr std::uintptr_t kFrozen = 1;
  static constexpr std::uintptr_t kUnmigrated = 2;

  struct Chain {
    Key key;
    std::atomic<std::uintptr_t> value;
    Chain* next;
  };

  struct Buckets {
    Buckets(std::size_t capacity, Buckets* from)
        : mask(capacity - 1),
          heads(new std::atomic<std::uintptr_t>[capacity]),
          source(from) {
      const std::uintptr_t init = from == nullptr ? 0 : kUnmigrated;
      for (std::size_t i = 0; i < capacity; ++i) {
        heads[i].store(init, std::memory_order_relaxed);
      }
    }

    const std::size_t mask;
    std::unique_ptr<std::atomic<std::uintptr_t>[]> heads;
    std::atomic<Buckets*> source;
  };

  static std::size_t round_up_pow2(std::size_t n) {
    std::size_t capacity = 1;
    while (capacity < n) capacity <<= 1;
    return capacity < 2 ? 2 : capacity;
  }

  static std::uintptr_t bits(const void* p) noexcept {
    return reinterpret_cast<std::uintptr_t>(p);
  }
  static Chain* chain_ptr(std::uintptr_t head) noexcept {
    return reinterpret_cast<Chain*>(head & ~kFrozen);
  }
  static Value* value_ptr(std::uintptr_t v) noexcept {
    return reinterpret_cast<Value*>(v & ~kFrozen);
  }

  static void delete_chain(Chain* c) {
    while (c != nullptr) {
      Chain* next = c->next;
      delete c;
      c = next;
    }
  }

  // Deleter for a fully migrated array: the chains are copies' originals and
  // the values now belong to the new array.
  static void destroy_frozen(void* p) {
    auto* buckets = static_cast<Buckets*>(p);
    for (std::size_t i = 0; i <= buckets->mask; ++i) {
      delete_chain(chain_ptr(buckets->heads[i].load(std::memory_order_relaxed)));
    }
    delete buckets;
  }

  template <typename Visitor>
  static void visit_one(const Chain& c, Visitor& visit) {
    if (Value* v = value_ptr(c.value.load(std::memory_order_acquire))) {
      visit(c.key, *v);
    }
  }

  static Chain* find(std::uintptr_t head, const Key& key) {
    for (Chain* c = chain_ptr(head); c != nullptr; c = c->next) {
      if (c->key == key) return c;
    }
    return nullptr;
  }

  // Copies old bucket (index mod old capacity) into both of its halves in
  // `buckets`. Safe to run concurrently from any number of threads.
  void migrate(Buckets* buckets, std::size_t index) {
    Buckets* source = buckets->source.load(std::memory_order_acquire);
    if (source == nullptr) return;
    const std::size_t low = index & source->mask;
    const std::size_t high = low + source->mask + 1;
    if (buckets->heads[low].load(std::memory_order_acquire) != kUnmigrated &&
        buckets->heads[high].load(std::memory_order_acquire) != kUnmigrated) {
      return;
    }

    auto& old_slot = source->heads[low];
    std::uintptr_t head = old_slot.load(std::memory_order_acquire);
    while ((head & kFrozen) == 0) {
      if (old_slot.compare_exchange_weak(head, head | kFrozen,
                                         std::memory_order_acq_rel)) {
        head |= kFrozen;
      }
    }

    Chain* low_chain = nullptr;
    Chain* high_chain = nullptr;
    Chain** low_tail = &low_chain;
    Chain** high_tail = &high_chain;
    for (Chain* c = chain_ptr(head); c != nullptr; c = c->next) {
      const std::uintptr_t v =
          c->value.fetch_or(kFrozen, std::memory_order_acq_rel) & ~kFrozen;
      auto* copy = new Chain{c->key, v, nullptr};
      if ((hasher_(c->key) & buckets->mask) == low) {
        *low_tail = copy;
        low_tail = &copy->next;
      } else {
        *high_tail = copy;
        high_tail = &copy->next;
      }
    }
    publish(buckets->heads[low], low_chain);
    publish(buckets->heads[high], high_chain);
  }

  static void publish(std::atomic<std::uintptr_t>& slot, Chain* chain) {
    std::uintptr_t expected = kUnmigrated;
    if (!slot.compare_exchange_strong(expected, bits(chain),
                                      std::memory_order_acq_rel)) {
      delete_chain(chain);
    }
  }

  void maybe_grow(std::size_t count) {
    const Buckets* current = table_.load(std::memory_order_acquire);
    if (count * 4 <= (current->mask + 1) * 3) return;
    std::unique_lock lock(resize_mutex_, std::try_to_lock);
    if (!lock.owns_lock()) return;
    Buckets* buckets = table_.load(std::memory_order_acquire);
    if (count_.load(std::memory_order_relaxed) * 4 <= (buckets->mask + 1) * 3) {
      return;
    }
    resize_locked(buckets);
  }

  void resize_locked(Buckets* old) {
    auto* bigger = new Buckets((old->mask + 1) * 2, old);
    table_.store(bigger, std::memory_order_release);
    for (std::size_t i = 0; i <= old->mask; ++i) migrate(bigger, i);
    bigger->source.store(nullptr, std::memory_order_release);
    domain_.retire(old, &IndexTable::destroy_frozen);
  }

  ReclamationDomain& domain_;
  [[no_unique_address]] Hash hasher_;
  std::atomic<Buckets*> table_;
  std::atomic<std::size_t> count_{0};
  std::mutex resize_mutex_;
};

}  // namespace mcprioq

#endif  // MCPRIOQ_NODE_INDEX_HPP_
