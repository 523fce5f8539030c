"""Virtual element solver for HJB and nondivergence-form elliptic problems."""

from ._core import (
    CordesReport,
    Mesh,
    Problem,
    SolveResult,
    StudyReport,
    StudyRow,
    __version__,
    check_cordes,
    convergence_study,
    cordes_text,
    generate_mesh,
    load_mesh,
    make_builtin,
    solve,
)

__all__ = [
    "CordesReport",
    "Mesh",
    "Problem",
    "SolveResult",
    "StudyReport",
    "StudyRow",
    "__version__",
    "check_cordes",
    "convergence_study",
    "cordes_text",
    "generate_mesh",
    "load_mesh",
    "make_builtin",
    "solve",
]
