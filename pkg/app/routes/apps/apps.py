# Endpoint for running an application experiment

from flask import Blueprint, request
from http import HTTPStatus
from app.utils.response_template import response_template
from app.engine.engine import ExperimentConfig, incidence_engine
from app.engine.errors import IncidenceError

apps_bp = Blueprint('apps', __name__)

@apps_bp.route('/apps', methods=['POST'])
def run_apps():
    """
    Run an application experiment over a q x seed grid.

    Request JSON format (any ExperimentConfig field):
    {
        "app": "...",
        "q": "2,3",
        "seeds": "0..9",
        "gen": "random_points:n=20"
    }

    Responses:
        200: Rows plus exit code; exit_code 1 means a hard check failed.
        400: Invalid configuration.
        500: Internal server error.
    """
    data = request.get_json(silent=True)
    if not data:
        return response_template(
            message="Bad Request",
            error="No JSON data provided",
            status_code=HTTPStatus.BAD_REQUEST
        )
    try:
        config = ExperimentConfig.from_dict({**data, "command": "apps"})
        result = incidence_engine.run(config)
        return response_template(
            message="Run finished" if result.exit_code == 0 else "Run finished with failed checks",
            data={
                "run_id": result.run_id,
                "exit_code": result.exit_code,
                "rows": [row.as_dict() for row in result.rows],
                "failures": result.failures,
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
