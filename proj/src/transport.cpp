#include "lgh/transport.hpp"

#include <ostream>

#include "lgh/errors.hpp"

namespace lgh {

const char* to_string(MessageKind kind) {
    switch (kind) {
        case MessageKind::split_announcement: return "split_announcement";
        case MessageKind::public_key: return "public_key";
        case MessageKind::masked_model: return "masked_model";
    }
    return "?";
}

bool TransportLog::send(Message msg, const Adjacency& adj) {
    const bool deliverable = msg.src >= 0 && msg.src < adj.num_agents && msg.dst >= 0 &&
                             msg.dst < adj.num_agents && adj.contains_edge(msg.dst, msg.src);
    if (!store_payloads_) msg.payload.clear();
    if (!deliverable) violations_.push_back(msg);
    messages_.push_back(std::move(msg));
    return deliverable;
}

void TransportLog::relay_pair_exchange(int hub, int l, int m, int iteration,
                                       const std::vector<double>& keys_l,
                                       const std::vector<double>& keys_m, const Adjacency& adj) {
    if (l == m) throw ProtocolError("relay_pair_exchange: pair members must differ");
    if (l == hub || m == hub || !adj.contains_edge(l, hub) || !adj.contains_edge(m, hub))
        throw ProtocolError("relay_pair_exchange: pair member not a neighbor of the hub");

    Message leg;
    leg.iteration = iteration;
    leg.kind = MessageKind::public_key;

    leg.src = l, leg.dst = hub, leg.relay_hub = -1, leg.payload = keys_l;
    send(leg, adj);
    leg.src = hub, leg.dst = m, leg.relay_hub = hub, leg.payload = keys_l;
    send(leg, adj);
    leg.src = m, leg.dst = hub, leg.relay_hub = -1, leg.payload = keys_m;
    send(leg, adj);
    leg.src = hub, leg.dst = l, leg.relay_hub = hub, leg.payload = keys_m;
    send(leg, adj);
}

size_t TransportLog::count(MessageKind kind) const {
    size_t n = 0;
    for (const auto& msg : messages_)
        if (msg.kind == kind) ++n;
    return n;
}

void TransportLog::dump(std::ostream& out) const {
    for (const auto& msg : messages_) {
        out << msg.iteration << ' ' << to_string(msg.kind) << ' ' << (msg.src + 1) << ' '
            << (msg.dst + 1);
        if (msg.relay_hub >= 0)
            out << ' ' << (msg.relay_hub + 1);
        else
            out << " -";
        out << '\n';
    }
}

}  // namespace lgh
