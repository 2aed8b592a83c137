#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qtl/commands.hpp"
#include "qtl/location.hpp"
#include "qtl/syntax.hpp"

namespace qtl {

class Type {
public:
    enum class Kind { Qbit, Unit, Bool, Ref };

    static Type qbit(Location l) { return Type(Kind::Qbit, std::move(l), nullptr); }
    static Type unit() { return Type(Kind::Unit, {}, nullptr); }
    static Type boolean() { return Type(Kind::Bool, {}, nullptr); }
    static Type ref(Type inner) {
        return Type(Kind::Ref, {}, std::make_shared<const Type>(std::move(inner)));
    }
    static Type from(const TypeAnnotation& a);

    Kind kind() const noexcept { return kind_; }
    bool is_qbit() const noexcept { return kind_ == Kind::Qbit; }
    /// Location of a qbit type.
    const Location& loc() const { return loc_; }
    /// Referent of a ref type.
    const Type& inner() const { return *inner_; }

    /// Free location variables.
    std::vector<Location> locations() const;
    Type substitute(const std::map<Location, Location>& sigma) const;

    friend bool operator==(const Type& a, const Type& b);

private:
    Type(Kind k, Location l, std::shared_ptr<const Type> inner)
        : kind_(k), loc_(std::move(l)), inner_(std::move(inner)) {}

    Kind kind_;
    Location loc_;
    std::shared_ptr<const Type> inner_;
};

std::string to_string(const Type& t);

/// Ordered variable bindings plus the set of locations no qubit occupies.
class TypeEnv {
public:
    TypeEnv() = default;
    explicit TypeEnv(std::set<Location> free_locs) : free_locs_(std::move(free_locs)) {}

    const std::vector<std::pair<std::string, Type>>& bindings() const noexcept { return bindings_; }
    const std::set<Location>& free_locs() const noexcept { return free_locs_; }

    const Type* lookup(const std::string& var) const;
    /// Adds `var`, replacing any binding it shadows.
    void bind(const std::string& var, Type t);
    bool unbind(const std::string& var);

    bool is_free(const Location& l) const { return free_locs_.count(l) != 0; }
    void add_free(const Location& l) { free_locs_.insert(l); }
    bool take_free(const Location& l) { return free_locs_.erase(l) != 0; }

    /// Variable currently holding a qubit at `l`, if any.
    std::optional<std::string> owner_of(const Location& l) const;

    /// At most one owner per location, and no location both free and owned.
    bool well_formed() const;

    friend bool operator==(const TypeEnv&, const TypeEnv&) = default;

private:
    std::vector<std::pair<std::string, Type>> bindings_;
    std::set<Location> free_locs_;
};

std::string to_string(const TypeEnv& env);

/// Π loc_params. <params> --effect--> <result_env | result_type>
struct FuncType {
    std::vector<Location> loc_params;
    std::vector<std::pair<std::string, Type>> param_types;
    CommandSeq effect;
    TypeEnv result_env;
    Type result_type = Type::unit();
    /// Location parameters used for allocation inside the body (not carried by arguments).
    std::vector<Location> internal_locs;
};

using FuncTypeEnv = std::map<std::string, FuncType>;

class TypeError : public std::runtime_error {
public:
    enum class Kind {
        UnboundVariable,
        UnboundFunction,
        LocationNotFree,
        LocationInUse,
        OwnershipViolation,
        TypeMismatch,
        EnvJoinMismatch,
        WhileEnvMismatch,
        ArityMismatch,
        BasisArityMismatch,
        RefContainsQubit,
        DuplicateName,
        UndeclaredLocation,
        RecursiveFunction,
    };

    TypeError(Kind kind, Span span, const std::string& message);

    Kind kind() const noexcept { return kind_; }
    const Span& span() const noexcept { return span_; }

private:
    Kind kind_;
    Span span_;
};

const char* to_string(TypeError::Kind k);

}  // namespace qtl
