"""
Report leaves: every stated number is a claim with its bound and evidence tier
"""
from typing import Dict, Optional

CERTIFIED = "certified"
PREDICTED = "predicted"
EMPIRICAL = "empirical"
TIERS = (CERTIFIED, PREDICTED, EMPIRICAL)


def claim(value, bound: Optional[float], tier: str) -> Dict:
    if tier not in TIERS:
        raise ValueError(f"unknown tier {tier!r}")
    if bound is None and tier != EMPIRICAL:
        raise ValueError("only empirical claims may omit their bound")
    return {"value": value, "bound": None if bound is None else float(bound), "tier": tier}


def fourier_claim(value, tier: str = CERTIFIED) -> Dict:
    """Claim from a FourierValue"""
    return claim(complex(value.value), value.error_bound, tier)
