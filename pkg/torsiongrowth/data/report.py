#! /usr/bin/env python

from typing import Any, Optional

from torsiongrowth.core.construct import ConstructionState
from torsiongrowth.core.utils import TorsionGrowthError


COLUMNS = ("i", "q_i", "a_i", "f_q", "t_p_log", "deficiency_sum",
           "congruence_ok", "gamma_bound_log")


class MalformedReport(TorsionGrowthError):
    pass


def build_report(state:ConstructionState, config:dict[str, Any],
                 error:Optional[dict[str, Any]] = None) -> dict[str, Any]:
    """ Machine report of a construction run: configuration, per-step
        records, and the state snapshot needed to resume.

    :rtype: dict[str, Any]
    """
    return {"config": config,
            "steps": state.records,
            "error": error,
            "state": state.to_json()}

def _cell(value:Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"

    return str(value)

def render_tsv(report:Any) -> str:
    """ Tab-separated summary of a construction report, one row per
        step, in a fixed column order.

    :param report: parsed report JSON
    :type report: Any
    :rtype: str
    :raises MalformedReport: if the report lacks step records
    """
    if not isinstance(report, dict) or not isinstance(report.get("steps"),
                                                      list):
        raise MalformedReport("Report has no list of steps",
                              anchor="report format")

    lines = ["\t".join(COLUMNS)]
    for k, record in enumerate(report["steps"]):
        if not isinstance(record, dict):
            raise MalformedReport(f"Step record {k} is not an object",
                                  anchor="report format")
        missing = [c for c in COLUMNS if c not in record]
        if len(missing) > 0:
            raise MalformedReport(f"Step record {k} lacks {missing}",
                                  anchor="report format")

        lines.append("\t".join(_cell(record[c]) for c in COLUMNS))

    return "\n".join(lines) + "\n"
