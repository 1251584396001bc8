#pragma once

#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "regemu/base_object.hpp"
#include "regemu/types.hpp"

namespace regemu {

// High-level operations on the emulated object. Write/Read target the
// k-register emulations; WriteMax/ReadMax target the max-register emulation.
enum class HighOpKind { Write, Read, WriteMax, ReadMax };

struct HighLevelOp {
    HighOpKind kind = HighOpKind::Read;
    Value val = v0;

    static HighLevelOp write(Value v) { return {HighOpKind::Write, v}; }
    static HighLevelOp read() { return {HighOpKind::Read, v0}; }
    static HighLevelOp write_max(Value v) { return {HighOpKind::WriteMax, v}; }
    static HighLevelOp read_max() { return {HighOpKind::ReadMax, v0}; }

    bool is_write_kind() const {
        return kind == HighOpKind::Write || kind == HighOpKind::WriteMax;
    }
};

enum class EventKind { Invoke, Return, Trigger, Respond, CrashServer, CrashClient };

// One history entry. `t` is the 1-based step index: the configuration at time
// t is the one reached after the t-th event.
struct Event {
    std::uint64_t t = 0;
    EventKind kind = EventKind::Invoke;
    ClientId client = -1;
    ServerId server = -1;
    ObjectId object = -1;
    OpId op_id = 0;
    HighLevelOp hop;                  // Invoke
    LowOp lop;                        // Trigger
    std::optional<TSVal> value;       // Respond payload (reads, cas)
    std::optional<Value> ret_value;   // Return payload (high-level reads)
};

struct History {
    std::vector<Event> events;

    std::uint64_t length() const { return events.size(); }
};

// --- derived views ------------------------------------------------------

// Low-level ops pending at time t: triggered at <= t, no respond at <= t.
inline std::map<OpId, Event> pending_at(const History& h, std::uint64_t t) {
    std::map<OpId, Event> pend;
    for (const Event& e : h.events) {
        if (e.t > t) break;
        if (e.kind == EventKind::Trigger) pend.emplace(e.op_id, e);
        else if (e.kind == EventKind::Respond) pend.erase(e.op_id);
    }
    return pend;
}

// Cov(t): base registers covered by a pending low-level register write at t.
inline std::set<ObjectId> covered_set(const History& h, std::uint64_t t) {
    if (t > h.length()) throw std::out_of_range("covered_set: t beyond history");
    std::set<ObjectId> cov;
    for (const auto& [id, e] : pending_at(h, t))
        if (e.lop.kind == LowOpKind::Write) cov.insert(e.object);
    return cov;
}

// C(t): clients with a completed high-level write at <= t.
inline std::set<ClientId> completed_writers(const History& h, std::uint64_t t) {
    std::set<ClientId> open_write;
    std::set<ClientId> done;
    for (const Event& e : h.events) {
        if (e.t > t) break;
        if (e.kind == EventKind::Invoke && e.hop.is_write_kind()) open_write.insert(e.client);
        else if (e.kind == EventKind::Return && open_write.erase(e.client)) done.insert(e.client);
    }
    return done;
}

// Maximum number of simultaneously incomplete high-level operations.
inline int point_contention(const History& h) {
    int open = 0, max_open = 0;
    for (const Event& e : h.events) {
        if (e.kind == EventKind::Invoke) max_open = std::max(max_open, ++open);
        else if (e.kind == EventKind::Return) --open;
    }
    return max_open;
}

// Distinct base objects touched by any Trigger: the run's resource consumption.
inline std::uint64_t count_resources(const History& h) {
    std::set<ObjectId> used;
    for (const Event& e : h.events)
        if (e.kind == EventKind::Trigger) used.insert(e.object);
    return used.size();
}

// --- serialization ------------------------------------------------------

inline nlohmann::ordered_json tsval_to_json(const TSVal& v) {
    return nlohmann::ordered_json{{"seq", v.ts.seq}, {"wr", v.ts.writer}, {"val", v.val}};
}

inline TSVal tsval_from_json(const nlohmann::json& j) {
    TSVal v;
    v.ts.seq = j.at("seq").get<std::uint64_t>();
    v.ts.writer = j.at("wr").get<std::uint32_t>();
    v.val = j.at("val").get<Value>();
    return v;
}

inline const char* event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::Invoke: return "invoke";
        case EventKind::Return: return "return";
        case EventKind::Trigger: return "trigger";
        case EventKind::Respond: return "respond";
        case EventKind::CrashServer: return "crash-server";
        case EventKind::CrashClient: return "crash-client";
    }
    return "?";
}

inline const char* high_op_name(HighOpKind k) {
    switch (k) {
        case HighOpKind::Write: return "write";
        case HighOpKind::Read: return "read";
        case HighOpKind::WriteMax: return "write-max";
        case HighOpKind::ReadMax: return "read-max";
    }
    return "?";
}

inline const char* low_op_name(LowOpKind k) {
    switch (k) {
        case LowOpKind::Read: return "read";
        case LowOpKind::Write: return "write";
        case LowOpKind::ReadMax: return "read-max";
        case LowOpKind::WriteMax: return "write-max";
        case LowOpKind::Cas: return "cas";
    }
    return "?";
}

// Field order is fixed ({t, kind, client?, server?, object?, op?, value?,
// op_id?}) so replayed runs compare byte-identical.
inline nlohmann::ordered_json event_to_json(const Event& e) {
    nlohmann::ordered_json j;
    j["t"] = e.t;
    j["kind"] = event_kind_name(e.kind);
    switch (e.kind) {
        case EventKind::Invoke: {
            j["client"] = e.client;
            nlohmann::ordered_json op;
            op["type"] = high_op_name(e.hop.kind);
            if (e.hop.is_write_kind()) op["val"] = e.hop.val;
            j["op"] = std::move(op);
            break;
        }
        case EventKind::Return:
            j["client"] = e.client;
            if (e.ret_value) j["value"] = *e.ret_value;
            break;
        case EventKind::Trigger: {
            j["client"] = e.client;
            j["object"] = e.object;
            nlohmann::ordered_json op;
            op["type"] = low_op_name(e.lop.kind);
            if (e.lop.kind == LowOpKind::Cas) {
                op["exp"] = tsval_to_json(e.lop.exp);
                op["new"] = tsval_to_json(e.lop.arg);
            } else if (e.lop.mutates()) {
                op["arg"] = tsval_to_json(e.lop.arg);
            }
            j["op"] = std::move(op);
            j["op_id"] = e.op_id;
            break;
        }
        case EventKind::Respond:
            if (e.value) j["value"] = tsval_to_json(*e.value);
            j["op_id"] = e.op_id;
            break;
        case EventKind::CrashServer:
            j["server"] = e.server;
            break;
        case EventKind::CrashClient:
            j["client"] = e.client;
            break;
    }
    return j;
}

inline std::string history_to_jsonl(const History& h) {
    std::string out;
    for (const Event& e : h.events) {
        out += event_to_json(e).dump();
        out += '\n';
    }
    return out;
}

inline Event event_from_json(const nlohmann::json& j) {
    Event e;
    e.t = j.at("t").get<std::uint64_t>();
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "invoke") {
        e.kind = EventKind::Invoke;
        e.client = j.at("client").get<ClientId>();
        const auto& op = j.at("op");
        const std::string type = op.at("type").get<std::string>();
        if (type == "write") e.hop = HighLevelOp::write(op.at("val").get<Value>());
        else if (type == "read") e.hop = HighLevelOp::read();
        else if (type == "write-max") e.hop = HighLevelOp::write_max(op.at("val").get<Value>());
        else if (type == "read-max") e.hop = HighLevelOp::read_max();
        else throw std::runtime_error("history parse: unknown high-level op " + type);
    } else if (kind == "return") {
        e.kind = EventKind::Return;
        e.client = j.at("client").get<ClientId>();
        if (j.contains("value")) e.ret_value = j.at("value").get<Value>();
    } else if (kind == "trigger") {
        e.kind = EventKind::Trigger;
        e.client = j.at("client").get<ClientId>();
        e.object = j.at("object").get<ObjectId>();
        e.op_id = j.at("op_id").get<OpId>();
        const auto& op = j.at("op");
        const std::string type = op.at("type").get<std::string>();
        if (type == "read") e.lop = LowOp::read();
        else if (type == "write") e.lop = LowOp::write(tsval_from_json(op.at("arg")));
        else if (type == "read-max") e.lop = LowOp::read_max();
        else if (type == "write-max") e.lop = LowOp::write_max(tsval_from_json(op.at("arg")));
        else if (type == "cas")
            e.lop = LowOp::cas(tsval_from_json(op.at("exp")), tsval_from_json(op.at("new")));
        else throw std::runtime_error("history parse: unknown low-level op " + type);
    } else if (kind == "respond") {
        e.kind = EventKind::Respond;
        e.op_id = j.at("op_id").get<OpId>();
        if (j.contains("value")) e.value = tsval_from_json(j.at("value"));
    } else if (kind == "crash-server") {
        e.kind = EventKind::CrashServer;
        e.server = j.at("server").get<ServerId>();
    } else if (kind == "crash-client") {
        e.kind = EventKind::CrashClient;
        e.client = j.at("client").get<ClientId>();
    } else {
        throw std::runtime_error("history parse: unknown event kind " + kind);
    }
    return e;
}

inline History history_from_jsonl(const std::string& text) {
    History h;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        h.events.push_back(event_from_json(nlohmann::json::parse(line)));
    }
    return h;
}

} // namespace regemu
