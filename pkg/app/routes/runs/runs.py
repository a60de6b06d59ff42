# Endpoints for stored runs

from flask import Blueprint, request
from http import HTTPStatus
from app.utils.response_template import response_template
from app.engine.engine import incidence_engine

runs_bp = Blueprint('runs', __name__)

@runs_bp.route('/runs', methods=['GET'])
def get_runs():
    """
    Stored runs, newest first.

    Query parameters:
        limit (int): Maximum number of runs, default 50.

    Responses:
        200: List of runs.
        500: Database error.
    """
    result = incidence_engine.list_runs(request.args.get('limit', default=50, type=int))
    if result['success']:
        return response_template(
            message=result['message'],
            data=result['data'],
            status_code=HTTPStatus.OK
        )
    return response_template(
        error=result['message'],
        status_code=HTTPStatus.INTERNAL_SERVER_ERROR
    )

@runs_bp.route('/runs/<run_id>', methods=['GET'])
def get_run(run_id):
    """
    One stored run with its rows.

    Responses:
        200: The run.
        404: Unknown run_id.
    """
    result = incidence_engine.get_run(run_id)
    if result['success']:
        return response_template(
            message=result['message'],
            data=result['data'],
            status_code=HTTPStatus.OK
        )
    return response_template(
        error=result['message'],
        status_code=HTTPStatus.NOT_FOUND
    )
