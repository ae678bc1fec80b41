import logging
import sys

from peewee import DatabaseError

from exp_divdiff.cli import CLI
from exp_divdiff.models import init_db

logger = logging.getLogger(__name__)


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        init_db()
    except (OSError, DatabaseError) as e:
        logger.warning("run history unavailable (%s); using an in-memory database", e)
        init_db(":memory:")
    cli = CLI()

    if argv:
        cli.fire(argv)
    else:
        cli.run()


if __name__ == '__main__':
    main()
