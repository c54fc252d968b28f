"""Inequality checks and randomized verification campaigns."""

from .campaign import (
    CHECKS,
    CampaignConfig,
    CampaignReport,
    CheckSpec,
    load_campaign_config,
    run_check,
    run_campaign,
    write_report,
)
from .models import CheckResult, compute_slack
from .verifier import Verifier

__all__ = [
    "CHECKS",
    "CampaignConfig",
    "CampaignReport",
    "CheckResult",
    "CheckSpec",
    "Verifier",
    "compute_slack",
    "load_campaign_config",
    "run_check",
    "run_campaign",
    "write_report",
]
