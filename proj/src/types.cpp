#include "qtl/types.hpp"

#include <algorithm>
#include <sstream>

namespace qtl {

Type Type::from(const TypeAnnotation& a) {
    switch (a.kind) {
        case TypeAnnotation::Kind::Qbit: return qbit(a.loc);
        case TypeAnnotation::Kind::Unit: return unit();
        case TypeAnnotation::Kind::Bool: return boolean();
        case TypeAnnotation::Kind::Ref: return ref(from(*a.inner));
    }
    return unit();
}

std::vector<Location> Type::locations() const {
    if (kind_ == Kind::Qbit) return {loc_};
    if (kind_ == Kind::Ref) return inner_->locations();
    return {};
}

Type Type::substitute(const std::map<Location, Location>& sigma) const {
    if (kind_ == Kind::Qbit) {
        auto it = sigma.find(loc_);
        return it == sigma.end() ? *this : qbit(it->second);
    }
    if (kind_ == Kind::Ref) return ref(inner_->substitute(sigma));
    return *this;
}

bool operator==(const Type& a, const Type& b) {
    if (a.kind_ != b.kind_) return false;
    if (a.kind_ == Type::Kind::Qbit) return a.loc_ == b.loc_;
    if (a.kind_ == Type::Kind::Ref) return *a.inner_ == *b.inner_;
    return true;
}

std::string to_string(const Type& t) {
    switch (t.kind()) {
        case Type::Kind::Qbit: return "qbit(" + t.loc().name + ")";
        case Type::Kind::Unit: return "unit";
        case Type::Kind::Bool: return "bool";
        case Type::Kind::Ref: return "ref " + to_string(t.inner());
    }
    return "?";
}

const Type* TypeEnv::lookup(const std::string& var) const {
    for (const auto& [name, t] : bindings_) {
        if (name == var) return &t;
    }
    return nullptr;
}

void TypeEnv::bind(const std::string& var, Type t) {
    unbind(var);
    bindings_.emplace_back(var, std::move(t));
}

bool TypeEnv::unbind(const std::string& var) {
    auto it = std::find_if(bindings_.begin(), bindings_.end(),
                           [&](const auto& b) { return b.first == var; });
    if (it == bindings_.end()) return false;
    bindings_.erase(it);
    return true;
}

std::optional<std::string> TypeEnv::owner_of(const Location& l) const {
    for (const auto& [name, t] : bindings_) {
        for (const auto& owned : t.locations()) {
            if (owned == l) return name;
        }
    }
    return std::nullopt;
}

bool TypeEnv::well_formed() const {
    std::set<Location> owned;
    std::set<std::string> names;
    for (const auto& [name, t] : bindings_) {
        if (!names.insert(name).second) return false;
        for (const auto& l : t.locations()) {
            if (!owned.insert(l).second || free_locs_.count(l)) return false;
        }
    }
    return true;
}

std::string to_string(const TypeEnv& env) {
    std::ostringstream os;
    os << "{";
    bool first = true;
    for (const auto& [name, t] : env.bindings()) {
        os << (first ? "" : ", ") << name << ": " << to_string(t);
        first = false;
    }
    for (const auto& l : env.free_locs()) {
        os << (first ? "" : ", ") << l.name;
        first = false;
    }
    os << "}";
    return os.str();
}

const char* to_string(TypeError::Kind k) {
    switch (k) {
        case TypeError::Kind::UnboundVariable: return "unbound-variable";
        case TypeError::Kind::UnboundFunction: return "unbound-function";
        case TypeError::Kind::LocationNotFree: return "location-not-free";
        case TypeError::Kind::LocationInUse: return "location-in-use";
        case TypeError::Kind::OwnershipViolation: return "ownership-violation";
        case TypeError::Kind::TypeMismatch: return "type-mismatch";
        case TypeError::Kind::EnvJoinMismatch: return "env-join-mismatch";
        case TypeError::Kind::WhileEnvMismatch: return "while-env-mismatch";
        case TypeError::Kind::ArityMismatch: return "arity-mismatch";
        case TypeError::Kind::BasisArityMismatch: return "basis-arity-mismatch";
        case TypeError::Kind::RefContainsQubit: return "ref-contains-qubit";
        case TypeError::Kind::DuplicateName: return "duplicate-name";
        case TypeError::Kind::UndeclaredLocation: return "undeclared-location";
        case TypeError::Kind::RecursiveFunction: return "recursive-function";
    }
    return "?";
}

TypeError::TypeError(Kind kind, Span span, const std::string& message)
    : std::runtime_error(to_string(span) + ": " + message), kind_(kind), span_(span) {}

}  // namespace qtl
