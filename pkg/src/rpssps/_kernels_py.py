"""Pure-Python kernels. Reference behaviour for the compiled twin in _kernels.pyx."""

SERVED, DROPPED, UNSERVED = 0, 1, 2


def closed_form_slots(m_first, m_last, periods, directions, positions):
    """Closed-form slot index for every m in [m_first, m_last].

    ``periods[0]``/``directions[0]``/``positions[0]`` are the root factors;
    entries 1..N are the alignment levels.
    """
    top = len(periods) - 1
    p0, q0, t0 = periods[0], directions[0], positions[0]
    out = []
    for m in range(m_first, m_last + 1):
        if top == 0:
            out.append(t0 + (m - 1) * p0)
            continue
        c = (periods[top] - positions[top] + m) // periods[top]
        for n in range(top - 1, 0, -1):
            p = periods[n]
            c = (p - positions[n] + m - directions[n] * c) // p
        out.append(t0 + (m - 1) * p0 + q0 * c)
    return out


def greedy_slots(m_last, offset, period, width):
    """First slot at or after each arrival ``offset + (m-1)*period``, m = 1..m_last."""
    return [-(-(offset + (m - 1) * period) // width) + 1 for m in range(1, m_last + 1)]


def match(slot_starts, arrivals, period):
    """FIFO matching of assignments to packets with the period-length drop rule.

    Returns ``(serving, status, wasted)``: per-packet assignment index
    (or -1), per-packet status code, and indices of unused assignments.
    """
    n_pk = len(arrivals)
    serving = [-1] * n_pk
    status = [UNSERVED] * n_pk
    wasted = []
    head = 0
    for k, s in enumerate(slot_starts):
        while head < n_pk and arrivals[head] <= s and s - arrivals[head] > period:
            status[head] = DROPPED
            head += 1
        if head < n_pk and arrivals[head] <= s:
            serving[head] = k
            status[head] = SERVED
            head += 1
        else:
            wasted.append(k)
    return serving, status, wasted
