#pragma once

#include <cstdint>

namespace chnet {

/// Counts scalar multiplications (and divisions) performed by instrumented
/// kernels while a MultScope referencing it is active on the current thread.
class MultCounter {
 public:
  std::uint64_t value() const noexcept { return multiplies_; }
  void add(std::uint64_t n) noexcept { multiplies_ += n; }

 private:
  std::uint64_t multiplies_ = 0;
};

namespace detail {
inline thread_local MultCounter* active_counter = nullptr;
}

/// RAII activation of a counter on the calling thread. Scopes nest; the
/// innermost one receives the counts.
class MultScope {
 public:
  explicit MultScope(MultCounter& counter) noexcept
      : previous_(detail::active_counter) {
    detail::active_counter = &counter;
  }
  ~MultScope() { detail::active_counter = previous_; }
  MultScope(const MultScope&) = delete;
  MultScope& operator=(const MultScope&) = delete;

 private:
  MultCounter* previous_;
};

inline void count_mults(std::uint64_t n) noexcept {
  if (auto* c = detail::active_counter) c->add(n);
}

inline bool counting_active() noexcept {
  return detail::active_counter != nullptr;
}

/// Snapshot of the active counter; delta() is what was counted since.
class MultProbe {
 public:
  MultProbe() noexcept
      : start_(detail::active_counter ? detail::active_counter->value() : 0) {}
  std::uint64_t delta() const noexcept {
    return detail::active_counter ? detail::active_counter->value() - start_
                                  : 0;
  }

 private:
  std::uint64_t start_;
};

}  // namespace chnet
