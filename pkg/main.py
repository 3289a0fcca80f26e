import logging
import sys
import traceback

from config import RUN_CONFIG

from DAL.json_store import JsonStore
from DAL.space_dao import SpaceDAO
from DAL.problem_dao import ProblemDAO

from SERVICE.report_service import ReportService

logging.basicConfig(level=getattr(logging, RUN_CONFIG["log_level"], logging.WARNING),
                    format=RUN_CONFIG["log_format"])


def global_except_hook(exc_type, exc_value, exc_tb):
    tb = "".join(traceback.format_exception(exc_type, exc_value, exc_tb))
    logging.error("Unhandled exception (global hook):\n%s", tb)


# install handler early
sys.excepthook = global_except_hook


def build_services():
    store = JsonStore({"encoding": "utf-8", "indent": 2})
    space_dao = SpaceDAO(store)
    problem_dao = ProblemDAO(store)

    report = ReportService(space_dao, problem_dao, store)

    return {
        "store": store,
        "space_dao": space_dao,
        "problem_dao": problem_dao,
        "report": report,
    }


if __name__ == "__main__":
    from tools.ultra_runner import run
    sys.exit(run(sys.argv[1:], build_services()))
