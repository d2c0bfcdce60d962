from prettytable import PrettyTable

from approx_revsynth.errors import Error, NonCriticalError
from approx_revsynth.log import logger


def collected_errors():
    # Flatten both ledgers into {source: message}
    all_error_messages = Error.error_messages + NonCriticalError.error_messages
    return {k: v for d in all_error_messages for k, v in d.items()}


def clear_errors():
    Error.error_messages.clear()
    NonCriticalError.error_messages.clear()


def print_errors():
    merged_error_messages = collected_errors()

    logger.info('The work is completed')

    if merged_error_messages:
        table = PrettyTable(["Source", "Error"])
        table.align["Source"] = "l"
        table.align["Error"] = "l"
        table.max_width = 75
        table.valign["Error"] = "t"

        for source, error_message in merged_error_messages.items():
            table.add_row([source, error_message])

        logger.error(f'\n{table}')
    return merged_error_messages
