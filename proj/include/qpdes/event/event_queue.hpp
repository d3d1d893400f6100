#pragma once

#include <algorithm>
#include <functional>
#include <vector>

#include "qpdes/event/event.hpp"

namespace qpdes {

/// Binary min-heap of events keyed by SortKey.
class EventQueue {
 public:
  void push(Event e) {
    heap_.push_back(std::move(e));
    std::push_heap(heap_.begin(), heap_.end(), later);
  }

  Event pop() {
    std::pop_heap(heap_.begin(), heap_.end(), later);
    Event e = std::move(heap_.back());
    heap_.pop_back();
    return e;
  }

  const Event& top() const { return heap_.front(); }
  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }
  SimTime min_time() const { return heap_.empty() ? SimTime::infinity() : heap_.front().key.time; }

 private:
  static bool later(const Event& a, const Event& b) { return b.key < a.key; }

  std::vector<Event> heap_;
};

}  // namespace qpdes
