import logging
from typing import List, Union

import numpy as np

from models.laws import MaxSemiStableDF, PhiMaxSemiStableDF
from models.report import CheckReport, CMReport, ScalingReport
from services.corefn import check_scaling_identity, psi_decrease_violations
from services.distributions import (
    InvalidCofactor,
    cofactor_identity_check,
    df_monotone_check,
    geometric_max_identity_check,
    lt_semi_sd_cofactor,
    max_semi_stability_check,
    phi_composition_check,
    quantile_agreement_check,
    quantile_roundtrip_check,
    semi_sd_cofactor_df,
)
from services.processes import compound_semi_sd_check
from utils.grids import log_grid

logger = logging.getLogger(__name__)

# Scales of the max-SD check for a constant-h frechet law; weibull uses reciprocals
MAX_SD_SCALES = (1.3, 2.0, 5.0)
COMPOUND_TIMES = (1.0, 2.0)


def _scaling_entry(report: ScalingReport) -> CheckReport:
    return CheckReport(
        check="scaling-identity",
        anchor="scaling-identity",
        max_err=report.max_rel_err,
        tol=report.tol,
        passed=report.passed
    )


def _cm_entry(report: CMReport, c: float, tol: float) -> CheckReport:
    worst = max(0.0, -min(o.min_value for o in report.orders))
    return CheckReport(
        check="cm-proxy",
        anchor="phi-composition",
        max_err=worst,
        tol=tol,
        passed=report.passed,
        detail={"c": c, "orders": [o.to_json_dict() for o in report.orders]}
    )


def _cofactor_entries(F: Union[MaxSemiStableDF, PhiMaxSemiStableDF], c: float, name: str,
                      tol: float) -> CheckReport:
    try:
        H, _ = semi_sd_cofactor_df(F, c)
    except InvalidCofactor as e:
        return CheckReport(check=name, anchor="cofactor", max_err=float("inf"), tol=tol,
                           passed=False, detail={"c": c, "error": str(e)})
    report = cofactor_identity_check(F, H, tol=tol)
    return report.model_copy(update={"check": name})


def _wrong_direction_entry(F: Union[MaxSemiStableDF, PhiMaxSemiStableDF]) -> CheckReport:
    c = 1.0 / F.psi.b
    try:
        semi_sd_cofactor_df(F, c)
        rejected = False
    except InvalidCofactor:
        rejected = True
    return CheckReport(
        check="cofactor-wrong-direction",
        anchor="cofactor",
        max_err=0.0 if rejected else 1.0,
        tol=0.0,
        passed=rejected,
        detail={"c": c}
    )


def verify_distribution(
    F: Union[MaxSemiStableDF, PhiMaxSemiStableDF],
    identity_tol: float = 1e-12,
    roundtrip_tol: float = 1e-10,
    cm_tol: float = 1e-10,
    cm_max_order: int = 8
) -> List[CheckReport]:
    """
    Run every grid identity that applies to the law

    All laws: scaling identity of psi, strict decrease of psi, d.f. shape,
    cofactor at c = b and rejection of c = 1/b, quantile round trip.
    Constant h adds the max-SD scales and closed-form quantile agreement.
    Max-semi-stable laws add F(x) = F(bx)^a; phi laws add the composition
    identity, the complete-monotonicity proxy, the compound factorization
    and (exponential phi) the geometric-max identity.

    Args:
        F: Law under test
        identity_tol: Tolerance of the grid identities
        roundtrip_tol: Tolerance of the quantile checks
        cm_tol: Slack of the finite-difference proxy
        cm_max_order: Highest finite-difference order

    Returns:
        Ordered list of CheckReport entries
    """
    psi = F.psi
    checks: List[CheckReport] = [_scaling_entry(check_scaling_identity(psi, tol=identity_tol))]

    decreases = psi_decrease_violations(psi)
    checks.append(CheckReport(check="psi-decreasing", anchor="scaling-identity",
                              max_err=float(decreases), tol=0.0, passed=decreases == 0))
    checks.append(df_monotone_check(F))

    if isinstance(F, MaxSemiStableDF):
        checks.append(max_semi_stability_check(F, tol=identity_tol))
    else:
        checks.append(phi_composition_check(F, tol=identity_tol))
        _, cm = lt_semi_sd_cofactor(F.phi, 1.0 / psi.a, max_order=cm_max_order)
        checks.append(_cm_entry(cm, 1.0 / psi.a, cm_tol))
        base = MaxSemiStableDF(psi=psi)
        for t in COMPOUND_TIMES:
            checks.append(compound_semi_sd_check(F.phi, base, t, tol=identity_tol))
        if F.phi.kind == "exponential":
            checks.append(geometric_max_identity_check(F, 1.0 / psi.a, psi.b, tol=identity_tol))

    checks.append(_cofactor_entries(F, psi.b, "cofactor", identity_tol))
    checks.append(_wrong_direction_entry(F))

    if psi.h.is_constant:
        for c in MAX_SD_SCALES:
            scale = c if psi.branch == "frechet" else 1.0 / c
            entry = _cofactor_entries(F, scale, "max-sd", identity_tol)
            checks.append(entry.model_copy(update={"anchor": "max-sd"}))
        checks.append(quantile_agreement_check(F, np.linspace(0.01, 0.99, 99), tol=roundtrip_tol))

    checks.append(quantile_roundtrip_check(F, log_grid(psi, 257), tol=roundtrip_tol))

    failed = [c.check for c in checks if not c.passed]
    if failed:
        logger.warning(f"Verification failed checks: {failed}")
    else:
        logger.info(f"All {len(checks)} verification checks pass")
    return checks
