#include "debatekit/backend.hpp"

#include <atomic>
#include <thread>

#include "debatekit/errors.hpp"

namespace debatekit {

void GenerationRequest::validate() const {
  if (messages.empty()) throw BackendError("request has no messages");
  for (const auto& m : messages) {
    if (m.content.empty()) throw BackendError("request message has empty content");
  }
  if (!(temperature >= 0.0) || temperature > 2.0)
    throw BackendError("temperature must be in [0, 2]");
  if (max_tokens <= 0) throw BackendError("max_tokens must be positive");
}

double Backend::score_sequence(const std::vector<ChatMessage>&, const std::string&) {
  throw CapabilityError("backend '" + id() + "' does not support sequence scoring");
}

std::vector<BatchOutcome> generate_batch(Backend& backend,
                                         const std::vector<GenerationRequest>& requests,
                                         int max_in_flight) {
  if (max_in_flight <= 0) throw BackendError("max_in_flight must be positive");
  std::vector<BatchOutcome> outcomes(requests.size());
  if (requests.empty()) return outcomes;

  // Workers pull indices from a shared counter; the worker count is the
  // concurrency bound and slots keep results in request order.
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= requests.size()) return;
      try {
        outcomes[i].result = backend.generate(requests[i]);
      } catch (const std::exception& e) {
        outcomes[i].error = e.what();
      }
    }
  };

  std::size_t n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(max_in_flight), requests.size());
  if (n_workers == 1) {
    worker();
    return outcomes;
  }
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return outcomes;
}

}  // namespace debatekit
