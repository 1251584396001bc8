#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "json.hpp"

#include "regemu/base_object.hpp"
#include "regemu/event.hpp"
#include "regemu/types.hpp"

namespace regemu {

// Automaton-private meaning of a trigger, handed back on its respond. The
// engine stores tags verbatim; it never interprets them.
struct OpTag {
    int purpose = 0;   // automaton-specific discriminator
    int gen = 0;       // collect / quorum generation, for dropping stale replies
    ServerId server = -1;
};

struct TriggerReq {
    ObjectId object = -1;
    LowOp op;
    OpTag tag;
};

struct Effect {
    std::vector<TriggerReq> triggers;
    std::optional<Value> ret;   // present iff the high-level op returns now
    bool returns = false;       // ack returns carry no value

    static Effect none() { return {}; }
};

// A client-side emulation automaton: deterministic transition functions with
// all waiting encoded in per-client state. The engine owns interleaving; an
// automaton never blocks internally.
class Emulation {
public:
    virtual ~Emulation() = default;

    virtual Effect on_invoke(ClientId c, const HighLevelOp& op) = 0;

    // `op` is the trigger this respond matches; `value` is the object's reply
    // (nullopt for write/write-max acks).
    virtual Effect on_respond(ClientId c, const TriggerReq& op,
                              const std::optional<TSVal>& value) = 0;

    virtual nlohmann::ordered_json dump_state(ClientId c) const = 0;

    virtual std::unique_ptr<Emulation> clone() const = 0;
};

} // namespace regemu
