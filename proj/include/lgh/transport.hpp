#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "lgh/topology.hpp"

namespace lgh {

enum class MessageKind { split_announcement, public_key, masked_model };

const char* to_string(MessageKind kind);

struct Message {
    int src = -1;
    int dst = -1;
    int iteration = 0;
    MessageKind kind = MessageKind::masked_model;
    std::vector<double> payload;
    int relay_hub = -1;  // set on the forwarded leg of a relayed key exchange
};

// Edge-constrained message log. A send whose endpoints are not adjacent is
// recorded as a violation rather than delivered, so audits can assert that
// the violation list is empty.
class TransportLog {
public:
    TransportLog() = default;
    explicit TransportLog(bool store_payloads) : store_payloads_(store_payloads) {}

    // Appends the message and returns whether it was deliverable
    // (dst in N_src). Non-deliverable messages are also copied to the
    // violation list.
    bool send(Message msg, const Adjacency& adj);

    // Four-leg public-key exchange between l and m through their common
    // neighbor `hub`: l->hub, hub->m, m->hub, hub->l. Payloads pass through
    // the hub unmodified; forwarded legs carry relay_hub = hub.
    void relay_pair_exchange(int hub, int l, int m, int iteration,
                             const std::vector<double>& keys_l,
                             const std::vector<double>& keys_m, const Adjacency& adj);

    const std::vector<Message>& messages() const { return messages_; }
    const std::vector<Message>& violations() const { return violations_; }
    size_t count(MessageKind kind) const;

    // One "i kind src dst hub" line per message, 1-indexed agents, hub "-"
    // for direct messages.
    void dump(std::ostream& out) const;

private:
    std::vector<Message> messages_;
    std::vector<Message> violations_;
    bool store_payloads_ = true;
};

}  // namespace lgh
