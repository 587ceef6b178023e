import platform
import traceback
from multiprocessing import Manager, Process, get_context


class WorkerFailure:
    def __init__(self, error: BaseException, trace: str):
        self.error = error
        self.trace = trace


def chunked_worker_run(map_func, args, results_queue=None):
    for a in args:
        # noinspection PyBroadException
        try:
            res = map_func(*a)
            results_queue.put(res)
        except Exception as e:
            results_queue.put(WorkerFailure(e, traceback.format_exc()))


def chunked_multiprocess_run(map_func, args, num_workers, q_max_size=1000):
    """
    Run map_func over args in worker processes and yield the results in input order.
    Worker i handles args[i::num_workers]; results are read back round-robin.
    An exception raised inside a worker is re-raised here.
    """
    num_jobs = len(args)
    if num_jobs < num_workers:
        num_workers = num_jobs
    if num_workers == 0:
        return

    manager = Manager()
    queues = [manager.Queue(maxsize=max(q_max_size // num_workers, 1)) for _ in range(num_workers)]
    if platform.system().lower() != 'windows':
        process_creation_func = get_context('spawn').Process
    else:
        process_creation_func = Process

    workers = []
    for i in range(num_workers):
        worker = process_creation_func(
            target=chunked_worker_run, args=(map_func, args[i::num_workers], queues[i]), daemon=True
        )
        workers.append(worker)
        worker.start()

    try:
        for i in range(num_jobs):
            res = queues[i % num_workers].get()
            if isinstance(res, WorkerFailure):
                raise res.error
            yield res
    finally:
        for worker in workers:
            if worker.is_alive():
                worker.terminate()
            worker.join()
            worker.close()
        manager.shutdown()
