# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; same contracts as _kernels_py. Inputs must fit in int64."""

from libc.stdlib cimport malloc, free

cdef enum:
    MAX_LEVELS = 128

SERVED, DROPPED, UNSERVED = 0, 1, 2


cdef inline long long floordiv(long long a, long long b) nogil:
    cdef long long q = a / b
    if (a % b != 0) and ((a < 0) != (b < 0)):
        q -= 1
    return q


def closed_form_slots(long long m_first, long long m_last, periods, directions, positions):
    cdef int top = len(periods) - 1
    cdef long long p[MAX_LEVELS]
    cdef long long q[MAX_LEVELS]
    cdef long long t[MAX_LEVELS]
    cdef int n
    cdef long long m, c, base
    if top + 1 > MAX_LEVELS:
        raise ValueError("too many levels")
    for n in range(top + 1):
        p[n] = periods[n]
        q[n] = directions[n]
        t[n] = positions[n]
    out = []
    for m in range(m_first, m_last + 1):
        base = t[0] + (m - 1) * p[0]
        if top == 0:
            out.append(base)
            continue
        c = floordiv(p[top] - t[top] + m, p[top])
        for n in range(top - 1, 0, -1):
            c = floordiv(p[n] - t[n] + m - q[n] * c, p[n])
        out.append(base + q[0] * c)
    return out


def greedy_slots(long long m_last, long long offset, long long period, long long width):
    cdef long long m
    out = []
    for m in range(1, m_last + 1):
        out.append(-floordiv(-(offset + (m - 1) * period), width) + 1)
    return out


def match(slot_starts, arrivals, long long period):
    cdef Py_ssize_t n_pk = len(arrivals)
    cdef Py_ssize_t n_as = len(slot_starts)
    cdef Py_ssize_t head = 0, k
    cdef long long s
    cdef long long *arr = <long long *> malloc((n_pk + 1) * sizeof(long long))
    if arr == NULL:
        raise MemoryError()
    serving = [-1] * n_pk
    status = [2] * n_pk
    wasted = []
    try:
        for k in range(n_pk):
            arr[k] = arrivals[k]
        for k in range(n_as):
            s = slot_starts[k]
            while head < n_pk and arr[head] <= s and s - arr[head] > period:
                status[head] = 1
                head += 1
            if head < n_pk and arr[head] <= s:
                serving[head] = k
                status[head] = 0
                head += 1
            else:
                wasted.append(k)
    finally:
        free(arr)
    return serving, status, wasted
