#pragma once

#include <optional>
#include <stdexcept>

#include "regemu/types.hpp"

namespace regemu {

enum class ObjectKind { Register, MaxRegister, Cas };

enum class LowOpKind { Read, Write, ReadMax, WriteMax, Cas };

// One low-level operation descriptor. `arg` is the written value for Write /
// WriteMax and the new value for Cas; `exp` is the Cas expected value.
struct LowOp {
    LowOpKind kind = LowOpKind::Read;
    TSVal arg;
    TSVal exp;

    static LowOp read() { return {LowOpKind::Read, {}, {}}; }
    static LowOp write(TSVal v) { return {LowOpKind::Write, v, {}}; }
    static LowOp read_max() { return {LowOpKind::ReadMax, {}, {}}; }
    static LowOp write_max(TSVal v) { return {LowOpKind::WriteMax, v, {}}; }
    static LowOp cas(TSVal exp, TSVal nw) { return {LowOpKind::Cas, nw, exp}; }

    bool mutates() const {
        return kind == LowOpKind::Write || kind == LowOpKind::WriteMax ||
               kind == LowOpKind::Cas;
    }
};

// Tagged state of one server-hosted primitive.
struct BaseObject {
    ObjectKind kind = ObjectKind::Register;
    TSVal state = ts_v0;
    bool crashed = false;
};

struct BaseOpResult {
    BaseObject obj;
    std::optional<TSVal> response;  // nullopt = ack (Write / WriteMax)
};

// Sequential specification of the three primitives, applied at the operation's
// linearization point. A crashed object never reaches this function: the
// simulator withholds the respond instead.
inline BaseOpResult apply_base_op(const BaseObject& obj, const LowOp& op) {
    if (obj.crashed) throw std::logic_error("apply_base_op: object is crashed");
    BaseObject next = obj;
    std::optional<TSVal> resp;
    switch (op.kind) {
        case LowOpKind::Read:
            if (obj.kind != ObjectKind::Register)
                throw std::logic_error("apply_base_op: read on non-register");
            resp = obj.state;
            break;
        case LowOpKind::Write:
            if (obj.kind != ObjectKind::Register)
                throw std::logic_error("apply_base_op: write on non-register");
            next.state = op.arg;
            break;
        case LowOpKind::ReadMax:
            if (obj.kind != ObjectKind::MaxRegister)
                throw std::logic_error("apply_base_op: read-max on non-max-register");
            resp = obj.state;
            break;
        case LowOpKind::WriteMax:
            if (obj.kind != ObjectKind::MaxRegister)
                throw std::logic_error("apply_base_op: write-max on non-max-register");
            if (obj.state < op.arg) next.state = op.arg;
            break;
        case LowOpKind::Cas:
            if (obj.kind != ObjectKind::Cas)
                throw std::logic_error("apply_base_op: cas on non-cas object");
            resp = obj.state;
            if (obj.state == op.exp) next.state = op.arg;
            break;
    }
    return {next, resp};
}

} // namespace regemu
