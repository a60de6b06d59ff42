"""Create experiment_runs and result_records

Revision ID: 3f1c9a7d2e10
Revises:
Create Date: 2026-10-18 10:12:41.208114

"""
from typing import Sequence, Union

from alembic import op
import sqlalchemy as sa


# revision identifiers, used by Alembic.
revision: str = '3f1c9a7d2e10'
down_revision: Union[str, None] = None
branch_labels: Union[str, Sequence[str], None] = None
depends_on: Union[str, Sequence[str], None] = None


def upgrade() -> None:
    op.create_table('experiment_runs',
    sa.Column('id', sa.Integer(), autoincrement=True, nullable=False),
    sa.Column('run_id', sa.String(length=16), nullable=False),
    sa.Column('command', sa.String(length=16), nullable=False),
    sa.Column('target', sa.String(length=32), nullable=True),
    sa.Column('config', sa.Text(), nullable=False),
    sa.Column('exit_code', sa.Integer(), nullable=False),
    sa.Column('row_count', sa.Integer(), nullable=True),
    sa.Column('created_at', sa.DateTime(), nullable=True),
    sa.PrimaryKeyConstraint('id')
    )
    op.create_index(op.f('ix_experiment_runs_run_id'), 'experiment_runs', ['run_id'], unique=False)
    op.create_table('result_records',
    sa.Column('id', sa.Integer(), autoincrement=True, nullable=False),
    sa.Column('experiment_id', sa.Integer(), nullable=False),
    sa.Column('run_id', sa.String(length=16), nullable=False),
    sa.Column('q', sa.Integer(), nullable=False),
    sa.Column('d1', sa.Integer(), nullable=False),
    sa.Column('d2', sa.Integer(), nullable=False),
    sa.Column('theorem_id', sa.String(length=32), nullable=False),
    sa.Column('seed', sa.Integer(), nullable=False),
    sa.Column('lhs', sa.Integer(), nullable=False),
    sa.Column('main_term', sa.Float(), nullable=False),
    sa.Column('bound_term', sa.Float(), nullable=False),
    sa.Column('discrepancy', sa.Float(), nullable=False),
    sa.Column('ratio', sa.Float(), nullable=False),
    sa.Column('hypothesis_ok', sa.Boolean(), nullable=False),
    sa.Column('elapsed_ms', sa.Float(), nullable=True),
    sa.ForeignKeyConstraint(['experiment_id'], ['experiment_runs.id'], ondelete='CASCADE'),
    sa.PrimaryKeyConstraint('id')
    )
    op.create_index(op.f('ix_result_records_run_id'), 'result_records', ['run_id'], unique=False)


def downgrade() -> None:
    op.drop_index(op.f('ix_result_records_run_id'), table_name='result_records')
    op.drop_table('result_records')
    op.drop_index(op.f('ix_experiment_runs_run_id'), table_name='experiment_runs')
    op.drop_table('experiment_runs')
