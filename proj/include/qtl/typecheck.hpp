#pragma once

#include <span>
#include <vector>

#include "qtl/archgraph.hpp"
#include "qtl/types.hpp"

namespace qtl {

struct Inferred {
    Type type;
    TypeEnv env;
    CommandSeq effect;
};

/// Syntax-directed typing: the type of `e`, the environment after it, and the
/// location commands it emits.
Inferred infer(const FuncTypeEnv& theta, const TypeEnv& gamma, const Expr& e);

/// Common environment two branches can both weaken to. Throws EnvJoinMismatch
/// when their free locations differ.
TypeEnv env_join(const TypeEnv& a, const TypeEnv& b, Span span = {});

/// Whether `after` can be weakened to `before`: same free locations and every
/// binding of `before` still present with the same type.
bool env_weakens_to(const TypeEnv& after, const TypeEnv& before);

/// Types every declaration, callees before callers.
FuncTypeEnv check_decls(std::span<const FuncDecl> decls);

/// Instantiates a call `f[loc_args](args)` against `gamma`.
Inferred instantiate_call(const FuncType& ft, const std::vector<Location>& loc_args,
                          const std::vector<std::string>& args, const TypeEnv& gamma,
                          Span span = {});

struct TypedProgram {
    FuncTypeEnv functions;
    Type type;
    CommandSeq effect;
};

/// Checks declarations, then the entry expression with every vertex of `g` free.
TypedProgram typecheck_program(const Program& p, const ArchGraph& g);

}  // namespace qtl
