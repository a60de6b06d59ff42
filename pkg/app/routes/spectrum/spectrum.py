# Endpoint for the product polarity graph spectrum

from flask import Blueprint, request
from http import HTTPStatus
from app.utils.response_template import response_template
from app.engine.engine import incidence_engine
from app.engine.errors import IncidenceError

spectrum_bp = Blueprint('spectrum', __name__)

@spectrum_bp.route('/spectrum', methods=['GET'])
def get_spectrum():
    """
    n, k, the second eigenvalue and its explicit bound for G(q, d1, d2).

    Query parameters:
        q (int): Field order, required.
        d1 (int): First dimension, default 2.
        d2 (int): Second dimension, default 2.

    Responses:
        200: Spectrum report.
        400: Missing or unsupported parameters.
        500: Internal server error.
    """
    try:
        q = request.args.get('q', type=int)
        d1 = request.args.get('d1', default=2, type=int)
        d2 = request.args.get('d2', default=2, type=int)
        if q is None:
            return response_template(
                message="Bad Request",
                error="Query parameter q is required",
                status_code=HTTPStatus.BAD_REQUEST
            )
        return response_template(
            message="Spectrum computed",
            data=incidence_engine.spectrum(q, d1, d2),
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
