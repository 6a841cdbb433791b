"""The boundary value problem instance."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidParameter
from .gfamily import Branch, GSpec, resolve_branch


@dataclass(frozen=True)
class ProblemSpec:
    """f''' + f f'' + g(f') = 0, f(0)=alpha, f'(0)=beta, f'(inf)=lambda_."""

    alpha: float
    beta: float
    lambda_: float
    g: GSpec
    branch: Branch = Branch.AUTO

    def __post_init__(self):
        object.__setattr__(self, "branch", Branch(self.branch))
        for name in ("alpha", "beta", "lambda_"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidParameter(f"{name} must be finite")
        if self.beta < 0:
            raise InvalidParameter("beta must be nonnegative")
        if self.lambda_ < 0:
            raise InvalidParameter("negative lambda is not supported")
        natural = resolve_branch(self.beta, self.lambda_)
        if self.branch is Branch.CONCAVE and natural is not Branch.CONCAVE:
            raise InvalidParameter("concave branch requires lambda < beta")
        if self.branch is Branch.CONVEX and natural is not Branch.CONVEX:
            raise InvalidParameter("convex branch requires beta < lambda")
        if self.branch is Branch.LINEAR and natural is not Branch.LINEAR:
            raise InvalidParameter("linear branch requires beta = lambda")

    @property
    def resolved_branch(self) -> Branch:
        return resolve_branch(self.beta, self.lambda_)

    def describe(self) -> dict:
        return {"g": self.g.describe(), "alpha": self.alpha, "beta": self.beta,
                "lambda": self.lambda_, "branch": self.resolved_branch.value}
