#include "qpdes/net/audit.hpp"

#include <unordered_map>

namespace qpdes::net {

void AuditReport::flag(std::string what) {
  ++violations;
  if (samples.size() < 8) samples.push_back(std::move(what));
}

void audit_state(const Layout& layout, const std::vector<WorkerId>& owner, std::span<qsm::LocalQsm* const> qsms,
                 std::span<const QuantumNetwork* const> models, const server::ServerCore* core, bool check_partners,
                 AuditReport& out) {
  ++out.passes;
  constexpr int kServer = -1;
  struct Holder {
    int where;
    const quantum::Ket* ket;
  };
  std::vector<std::vector<quantum::Ket>> local(qsms.size());
  std::vector<quantum::Ket> remote = core != nullptr ? core->snapshot() : std::vector<quantum::Ket>{};
  std::unordered_map<QubitKey, Holder> holder;

  auto claim = [&](const QubitKey& k, int where, const quantum::Ket* ket) {
    const auto [it, fresh] = holder.emplace(k, Holder{where, ket});
    if (!fresh) {
      out.flag("key " + k.str() + " held by both " + std::to_string(it->second.where) + " and " + std::to_string(where));
    }
  };
  for (std::size_t w = 0; w < qsms.size(); ++w) {
    local[w] = qsms[w]->local_states();
    for (const quantum::Ket& s : local[w]) {
      for (const QubitKey& k : s.keys) {
        if (!qsms[w]->is_local(k) || qsms[w]->is_global(k)) out.flag("worker " + std::to_string(w) + " mixes tags in one state");
        claim(k, static_cast<int>(w), &s);
      }
    }
  }
  for (const quantum::Ket& s : remote) {
    for (const QubitKey& k : s.keys) claim(k, kServer, &s);
  }
  for (std::size_t w = 0; w < qsms.size(); ++w) {
    for (const QubitKey& k : qsms[w]->global_keys()) {
      const auto it = holder.find(k);
      if (it == holder.end() || it->second.where != kServer) {
        out.flag("worker " + std::to_string(w) + " tags " + k.str() + " GLOBAL but the server does not hold it");
      }
    }
  }

  for (topo::RouterId r = 0; r < layout.routers(); ++r) {
    const QuantumNetwork* model = models[owner[r]];
    const auto& mems = layout.memories(r);
    for (std::uint32_t m = 0; m < mems.size(); ++m) {
      if (model->memory(r, m).status != MemoryStatus::kEntangled) continue;
      const auto it = holder.find(mems[m].key);
      if (it == holder.end()) {
        out.flag("entangled memory " + mems[m].key.str() + " has no state");
        continue;
      }
      if (!check_partners) continue;
      const Slot& slot = layout.slots()[mems[m].slot];
      const quantum::Ket& ket = *it->second.ket;
      bool partnered = false;
      for (const QubitKey& other : ket.keys) {
        if (other == mems[m].key) continue;
        const MemoryInfo* info = layout.find_memory(other);
        if (info == nullptr) continue;
        const Slot& os = layout.slots()[info->slot];
        partnered |= os.flow == slot.flow && (os.chain | 1u) == (slot.chain | 1u);
      }
      const bool source = layout.position(slot.flow, r) == 0;
      if (!partnered && !(source && ket.width() == 1)) {
        const MemoryState& st = model->memory(r, m);
        std::string held;
        for (const QubitKey& k : ket.keys) held += " " + k.str();
        out.flag("entangled memory " + mems[m].key.str() + " of router " + std::to_string(r) + " (flow " +
                 std::to_string(slot.flow) + ", hop " + std::to_string(slot.hop) + ", chain " +
                 std::to_string(slot.chain) + ", epoch " + std::to_string(st.epoch) +
                 (st.ready ? ", ready" : "") + (st.purifying ? ", purifying" : "") + ") has no partner in" + held);
      }
    }
  }
}

}  // namespace qpdes::net
