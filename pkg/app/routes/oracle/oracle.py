# Endpoint for the oracle suite

from flask import Blueprint, request
from http import HTTPStatus
from app.utils.response_template import response_template
from app.engine.engine import DEFAULT_ORACLE_FIELDS, ExperimentConfig, incidence_engine
from app.engine.errors import IncidenceError

oracle_bp = Blueprint('oracle', __name__)

@oracle_bp.route('/oracle', methods=['POST'])
def run_oracle():
    """
    Run the oracle suite.

    Request JSON format:
    {
        "q": "2,3",
        "oracle_instances": 5,
        "inject_fault": "0,1"
    }

    Responses:
        200: Checks with pass/fail and the first counterexample.
        400: Invalid configuration.
        500: Internal server error.
    """
    data = request.get_json(silent=True) or {}
    try:
        defaults = ExperimentConfig.from_dict({"q_list": DEFAULT_ORACLE_FIELDS})
        config = ExperimentConfig.from_dict({**data, "command": "oracle"}, defaults)
        report = incidence_engine.oracle(config)
        return response_template(
            message="Oracle passed" if report.ok else "Oracle failed",
            data={
                "ok": report.ok,
                "exit_code": report.exit_code,
                "checks": [check.as_dict() for check in report.checks],
                "counterexample": report.counterexample,
            },
            status_code=HTTPStatus.OK
        )
    except IncidenceError as e:
        return response_template(
            message="Bad Request",
            error=str(e),
            status_code=HTTPStatus.BAD_REQUEST
        )
    except Exception as e:
        return response_template(
            message='Internal Server Error',
            error=f'An unexpected error occurred: {str(e)}',
            status_code=HTTPStatus.INTERNAL_SERVER_ERROR
        )
